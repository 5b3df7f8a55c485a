#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roadpop/road_network.hpp"
#include "roadpop/tracks.hpp"

namespace roadpop {

struct MatcherConfig {
  double sigma_m = 15.0;              // std. dev. of GPS noise
  double candidate_radius_m = 60.0;
  double transition_same = 1.0;
  double transition_adjacent = 0.2;
  double transition_other = 0.0;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
  bool set(std::string_view key, double value);
};

struct PointAssignment {
  std::size_t point_index = 0;
  SegmentIndex segment = 0;
  LatLon projected;
  double distance_m = 0.0;
};

struct MatchedTrack {
  std::string track_id;
  std::vector<PointAssignment> assignments;  // ordered by point index
  std::vector<SegmentIndex> traversed;       // consecutive duplicates collapsed
  std::size_t break_count = 0;
};

/// Log of the zero-mean Gaussian density at `distance_m`. Throws
/// std::invalid_argument unless sigma_m > 0 and distance_m >= 0.
double emission_logweight(double distance_m, double sigma_m);

/// Discrete transition probability: same segment, adjacent (shared
/// endpoint), or anything else.
double transition_weight(SegmentIndex prev, SegmentIndex next, const RoadNetwork& net,
                         const MatcherConfig& cfg);
/// Id-based form; throws InputError for unknown ids.
double transition_weight(std::string_view prev, std::string_view next, const RoadNetwork& net,
                         const MatcherConfig& cfg);

/// Snaps a track onto the network. Points without candidates within the
/// radius are skipped; unreachable transitions split the track into
/// independently decoded chains. Throws std::invalid_argument for an
/// unloaded network or invalid config.
MatchedTrack match_track(const Track& t, const RoadNetwork& net, const MatcherConfig& cfg);

std::vector<SegmentIndex> traversed_segments(std::span<const PointAssignment> assignments);
inline std::vector<SegmentIndex> traversed_segments(const MatchedTrack& m) {
  return traversed_segments(m.assignments);
}

}  // namespace roadpop
