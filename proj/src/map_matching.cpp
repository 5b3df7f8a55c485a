#include "roadpop/map_matching.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "roadpop/viterbi.hpp"

namespace roadpop {

void MatcherConfig::validate() const {
  if (!(sigma_m > 0.0)) throw std::invalid_argument("sigma must be > 0");
  if (!(candidate_radius_m > 0.0)) throw std::invalid_argument("candidate radius must be > 0");
  for (double p : {transition_same, transition_adjacent, transition_other}) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("transition probabilities must lie in [0, 1]");
  }
}

bool MatcherConfig::set(std::string_view key, double value) {
  if (key == "sigma") {
    sigma_m = value;
  } else if (key == "candidate_radius") {
    candidate_radius_m = value;
  } else if (key == "transition_same") {
    transition_same = value;
  } else if (key == "transition_adjacent") {
    transition_adjacent = value;
  } else if (key == "transition_other") {
    transition_other = value;
  } else {
    return false;
  }
  return true;
}

double emission_logweight(double distance_m, double sigma_m) {
  if (!(sigma_m > 0.0)) throw std::invalid_argument("sigma must be > 0");
  if (!(distance_m >= 0.0)) throw std::invalid_argument("distance must be >= 0");
  const double z = distance_m / sigma_m;
  return -std::log(sigma_m * std::sqrt(2.0 * std::numbers::pi)) - 0.5 * z * z;
}

double transition_weight(SegmentIndex prev, SegmentIndex next, const RoadNetwork& net,
                         const MatcherConfig& cfg) {
  switch (net.adjacency(prev, next)) {
    case Adjacency::same: return cfg.transition_same;
    case Adjacency::adjacent: return cfg.transition_adjacent;
    case Adjacency::disconnected: return cfg.transition_other;
  }
  return cfg.transition_other;
}

double transition_weight(std::string_view prev, std::string_view next, const RoadNetwork& net,
                         const MatcherConfig& cfg) {
  return transition_weight(net.segment_index(prev), net.segment_index(next), net, cfg);
}

std::vector<SegmentIndex> traversed_segments(std::span<const PointAssignment> assignments) {
  std::vector<SegmentIndex> out;
  for (const auto& a : assignments) {
    if (out.empty() || out.back() != a.segment) out.push_back(a.segment);
  }
  return out;
}

namespace {

double log_or_neg_inf(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

}  // namespace

MatchedTrack match_track(const Track& t, const RoadNetwork& net, const MatcherConfig& cfg) {
  if (!net.loaded()) throw std::invalid_argument("road network is not loaded");
  cfg.validate();

  MatchedTrack out;
  out.track_id = t.track_id;

  std::vector<Candidate> candidates;
  std::vector<HmmState> states;
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> point_of_layer;
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    auto near = net.candidates_near(t.points[i].position, cfg.candidate_radius_m);
    if (near.empty()) continue;
    for (const auto& c : near) {
      states.push_back({c.segment, emission_logweight(c.distance_m, cfg.sigma_m)});
      candidates.push_back(c);
    }
    offsets.push_back(states.size());
    point_of_layer.push_back(i);
  }
  if (point_of_layer.empty()) return out;

  const double log_same = log_or_neg_inf(cfg.transition_same);
  const double log_adjacent = log_or_neg_inf(cfg.transition_adjacent);
  const double log_other = log_or_neg_inf(cfg.transition_other);
  const auto path = viterbi_decode(states, offsets, [&](std::uint32_t a, std::uint32_t b) {
    switch (net.adjacency(a, b)) {
      case Adjacency::same: return log_same;
      case Adjacency::adjacent: return log_adjacent;
      case Adjacency::disconnected: break;
    }
    return log_other;
  });

  out.break_count = path.break_count;
  out.assignments.reserve(point_of_layer.size());
  for (std::size_t layer = 0; layer < point_of_layer.size(); ++layer) {
    const auto& c = candidates[offsets[layer] + path.choice[layer]];
    out.assignments.push_back({point_of_layer[layer], c.segment, c.point, c.distance_m});
  }
  out.traversed = traversed_segments(out.assignments);
  return out;
}

}  // namespace roadpop
