#include "roadpop/batch.hpp"

#include <algorithm>
#include <exception>

#include <omp.h>

namespace roadpop {

int default_workers() { return std::max(1, omp_get_max_threads()); }

std::vector<MatchedTrack> match_tracks_serial(std::span<const Track> tracks, const RoadNetwork& net,
                                              const MatcherConfig& cfg) {
  std::vector<MatchedTrack> out;
  out.reserve(tracks.size());
  for (const auto& t : tracks) out.push_back(match_track(t, net, cfg));
  return out;
}

std::vector<MatchedTrack> match_tracks_parallel(std::span<const Track> tracks, const RoadNetwork& net,
                                                const MatcherConfig& cfg, int workers) {
  cfg.validate();
  std::vector<MatchedTrack> out(tracks.size());
  const auto n = static_cast<std::ptrdiff_t>(tracks.size());
  std::vector<std::exception_ptr> errors(tracks.size());
  bool failed = false;

#pragma omp parallel for schedule(dynamic, 8) num_threads(std::max(1, workers)) reduction(|| : failed)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = match_track(tracks[i], net, cfg);
    } catch (...) {
      errors[i] = std::current_exception();
      failed = true;
    }
  }

  if (failed) {
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return out;
}

UsageTables accumulate_serial(std::span<const ActivityUsage> activities) { return accumulate(activities); }

UsageTables accumulate_parallel(std::span<const ActivityUsage> activities, int workers) {
  const int chunks = std::max(1, std::min<int>(workers, static_cast<int>(activities.size())));
  std::vector<UsageTables> partial(static_cast<std::size_t>(chunks));
  const std::size_t n = activities.size();

#pragma omp parallel for schedule(static, 1) num_threads(chunks)
  for (int c = 0; c < chunks; ++c) {
    const std::size_t begin = n * static_cast<std::size_t>(c) / static_cast<std::size_t>(chunks);
    const std::size_t end = n * static_cast<std::size_t>(c + 1) / static_cast<std::size_t>(chunks);
    for (std::size_t i = begin; i < end; ++i) partial[static_cast<std::size_t>(c)].add(activities[i]);
  }

  UsageTables out = std::move(partial.front());
  for (std::size_t c = 1; c < partial.size(); ++c) out.merge(partial[c]);
  return out;
}

}  // namespace roadpop
