// Brute-force reference implementations used to check the production code.
// Shared with src/: plain data types, the haversine distance, and
// project_to_segment (which test_road_network checks against dense sampling).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "roadpop/geo.hpp"
#include "roadpop/map_matching.hpp"
#include "roadpop/road_network.hpp"

namespace oracle {

/// max{h : #{i : N_i >= h} >= h}, by trying every h.
inline std::int64_t p_index(const std::vector<std::int64_t>& counts) {
  std::int64_t best = 0;
  for (std::int64_t h = 0; h <= static_cast<std::int64_t>(counts.size()); ++h) {
    std::int64_t at_least = 0;
    for (auto c : counts) at_least += c >= h ? 1 : 0;
    if (at_least >= h) best = h;
  }
  return best;
}

/// L * sum over classes of (sum x^2 - (sum x)^2 / m), exact for integer values
/// when every class size divides L.
inline constexpr std::int64_t kCostScale = 27720;  // lcm(1..12)

inline std::int64_t scaled_cost(const std::vector<std::vector<std::int64_t>>& classes) {
  std::int64_t cost = 0;
  for (const auto& c : classes) {
    if (c.empty()) continue;
    std::int64_t s1 = 0, s2 = 0;
    for (auto v : c) {
      s1 += v;
      s2 += v * v;
    }
    const auto m = static_cast<std::int64_t>(c.size());
    cost += kCostScale * s2 - (kCostScale / m) * s1 * s1;
  }
  return cost;
}

/// Minimum scaled cost over every way of cutting the sorted values into k
/// non-empty contiguous runs (equal values may be split).
inline std::int64_t jenks_optimum(std::vector<std::int64_t> values, std::size_t k) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  std::vector<std::size_t> cuts;
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t left) {
    if (left == 1) {
      cuts.push_back(n);
      std::vector<std::vector<std::int64_t>> classes;
      std::size_t a = 0;
      for (auto b : cuts) {
        classes.emplace_back(values.begin() + static_cast<std::ptrdiff_t>(a),
                             values.begin() + static_cast<std::ptrdiff_t>(b));
        a = b;
      }
      best = std::min(best, scaled_cost(classes));
      cuts.pop_back();
      return;
    }
    for (std::size_t end = start + 1; end + left - 1 <= n; ++end) {
      cuts.push_back(end);
      rec(end, left - 1);
      cuts.pop_back();
    }
  };
  rec(0, k);
  return best;
}

/// Layered HMM instance in plain form: per layer a list of (segment, log
/// emission), and a log-transition function over segments.
struct Layer {
  std::vector<std::uint32_t> segment;
  std::vector<double> emission;
};

/// Chains split where no state of a layer is reachable (finite transition)
/// from any state of the previous layer that is itself reachable. Returns the
/// first layer of each chain.
inline std::vector<std::size_t> chain_starts(const std::vector<Layer>& layers,
                                             const std::function<double(std::uint32_t, std::uint32_t)>& tr) {
  std::vector<std::size_t> starts{0};
  if (layers.empty()) return starts;
  std::vector<bool> alive(layers[0].segment.size(), true);
  for (std::size_t t = 1; t < layers.size(); ++t) {
    std::vector<bool> next(layers[t].segment.size(), false);
    bool any = false;
    for (std::size_t j = 0; j < next.size(); ++j) {
      for (std::size_t i = 0; i < alive.size(); ++i) {
        if (alive[i] && std::isfinite(tr(layers[t - 1].segment[i], layers[t].segment[j]))) {
          next[j] = true;
          any = true;
        }
      }
    }
    if (!any) {
      starts.push_back(t);
      next.assign(next.size(), true);
    }
    alive = std::move(next);
  }
  return starts;
}

/// Log weight of a full choice sequence, transitions counted only inside
/// chains.
inline double sequence_weight(const std::vector<Layer>& layers, const std::vector<std::size_t>& choice,
                              const std::vector<std::size_t>& starts,
                              const std::function<double(std::uint32_t, std::uint32_t)>& tr) {
  double w = 0.0;
  for (std::size_t t = 0; t < layers.size(); ++t) {
    w += layers[t].emission[choice[t]];
    const bool chain_head = std::find(starts.begin(), starts.end(), t) != starts.end();
    if (!chain_head) w += tr(layers[t - 1].segment[choice[t - 1]], layers[t].segment[choice[t]]);
  }
  return w;
}

/// Best total log weight by enumerating every state sequence of every chain.
inline double viterbi_optimum(const std::vector<Layer>& layers,
                              const std::function<double(std::uint32_t, std::uint32_t)>& tr) {
  const auto starts = chain_starts(layers, tr);
  double total = 0.0;
  for (std::size_t c = 0; c < starts.size(); ++c) {
    const std::size_t a = starts[c];
    const std::size_t b = c + 1 < starts.size() ? starts[c + 1] : layers.size();
    double best = -std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, std::size_t, double)> rec = [&](std::size_t t, std::size_t prev, double w) {
      if (t == b) {
        best = std::max(best, w);
        return;
      }
      for (std::size_t j = 0; j < layers[t].segment.size(); ++j) {
        double x = w + layers[t].emission[j];
        if (t > a) x += tr(layers[t - 1].segment[prev], layers[t].segment[j]);
        if (x == -std::numeric_limits<double>::infinity()) continue;
        rec(t + 1, j, x);
      }
    };
    rec(a, 0, 0.0);
    total += best;
  }
  return total;
}

/// Every segment within radius by linear scan, sorted by (distance, index).
inline std::vector<roadpop::Candidate> candidates_linear(const roadpop::RoadNetwork& net,
                                                         const roadpop::LatLon& p, double radius_m) {
  std::vector<roadpop::Candidate> out;
  for (std::size_t i = 0; i < net.segment_count(); ++i) {
    const auto pr = roadpop::project_to_segment(p, net.segment(static_cast<roadpop::SegmentIndex>(i)));
    if (pr.distance_m <= radius_m) out.push_back({static_cast<roadpop::SegmentIndex>(i), pr.point, pr.distance_m});
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return x.distance_m != y.distance_m ? x.distance_m < y.distance_m : x.segment < y.segment;
  });
  return out;
}

/// Point at fraction f along the great circle from a to b (slerp).
inline roadpop::LatLon great_circle_point(const roadpop::LatLon& a, const roadpop::LatLon& b, double f) {
  using roadpop::deg_to_rad;
  using roadpop::rad_to_deg;
  const double la1 = deg_to_rad(a.lat), lo1 = deg_to_rad(a.lon);
  const double la2 = deg_to_rad(b.lat), lo2 = deg_to_rad(b.lon);
  const double x1 = std::cos(la1) * std::cos(lo1), y1 = std::cos(la1) * std::sin(lo1), z1 = std::sin(la1);
  const double x2 = std::cos(la2) * std::cos(lo2), y2 = std::cos(la2) * std::sin(lo2), z2 = std::sin(la2);
  const double d = std::acos(std::clamp(x1 * x2 + y1 * y2 + z1 * z2, -1.0, 1.0));
  if (d == 0.0) return a;
  const double wa = std::sin((1 - f) * d) / std::sin(d), wb = std::sin(f * d) / std::sin(d);
  const double x = wa * x1 + wb * x2, y = wa * y1 + wb * y2, z = wa * z1 + wb * z2;
  return {rad_to_deg(std::atan2(z, std::hypot(x, y))), rad_to_deg(std::atan2(y, x))};
}

/// Smallest great-circle distance from p to densely sampled points of the
/// polyline (samples at most `step_m` apart, then refined by ternary search
/// around the best sample).
inline double polyline_distance(const roadpop::LatLon& p, const std::vector<roadpop::LatLon>& line,
                                double step_m = 0.5) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const double len = roadpop::geodesic_m(line[i], line[i + 1]);
    const auto n = static_cast<std::size_t>(std::ceil(len / step_m)) + 1;
    std::size_t arg = 0;
    double local = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s <= n; ++s) {
      const double d = roadpop::geodesic_m(p, great_circle_point(line[i], line[i + 1], double(s) / double(n)));
      if (d < local) {
        local = d;
        arg = s;
      }
    }
    double lo = arg == 0 ? 0.0 : double(arg - 1) / double(n);
    double hi = arg == n ? 1.0 : double(arg + 1) / double(n);
    for (int it = 0; it < 100; ++it) {
      const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
      const double d1 = roadpop::geodesic_m(p, great_circle_point(line[i], line[i + 1], m1));
      const double d2 = roadpop::geodesic_m(p, great_circle_point(line[i], line[i + 1], m2));
      (d1 < d2 ? hi : lo) = d1 < d2 ? m2 : m1;
    }
    local = std::min(local, roadpop::geodesic_m(p, great_circle_point(line[i], line[i + 1], (lo + hi) / 2)));
    best = std::min(best, local);
  }
  return best;
}

/// Log transition from the segment endpoints directly: same, shared endpoint,
/// or impossible.
inline std::function<double(std::uint32_t, std::uint32_t)> log_transition(const roadpop::RoadNetwork& net,
                                                                          const roadpop::MatcherConfig& cfg) {
  return [&net, cfg](std::uint32_t a, std::uint32_t b) {
    const auto& x = net.segment(a);
    const auto& y = net.segment(b);
    double w = cfg.transition_other;
    if (a == b) {
      w = cfg.transition_same;
    } else if (x.endpoint_a == y.endpoint_a || x.endpoint_a == y.endpoint_b || x.endpoint_b == y.endpoint_a ||
               x.endpoint_b == y.endpoint_b) {
      w = cfg.transition_adjacent;
    }
    return w > 0 ? std::log(w) : -std::numeric_limits<double>::infinity();
  };
}

struct MatchCheck {
  double optimum = 0.0;        // exhaustive best total log weight
  double achieved = 0.0;       // weight of the matcher's sequence
  std::size_t chains = 0;      // expected number of independently decoded chains
  bool layout_ok = true;       // assignments cover exactly the decodable points
};

/// Rebuilds the HMM of `t` from linear-scan candidates and scores the
/// matcher's output against exhaustive enumeration.
inline MatchCheck check_match(const roadpop::Track& t, const roadpop::RoadNetwork& net,
                              const roadpop::MatcherConfig& cfg, const roadpop::MatchedTrack& m) {
  MatchCheck out;
  std::vector<Layer> layers;
  std::vector<std::size_t> point_of_layer;
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    Layer l;
    for (const auto& c : candidates_linear(net, t.points[i].position, cfg.candidate_radius_m)) {
      l.segment.push_back(c.segment);
      const double d = c.distance_m;
      l.emission.push_back(-std::log(cfg.sigma_m * std::sqrt(2 * 3.14159265358979323846)) -
                           d * d / (2 * cfg.sigma_m * cfg.sigma_m));
    }
    if (l.segment.empty()) continue;
    layers.push_back(std::move(l));
    point_of_layer.push_back(i);
  }
  const auto tr = log_transition(net, cfg);
  out.optimum = layers.empty() ? 0.0 : viterbi_optimum(layers, tr);
  const auto starts = chain_starts(layers, tr);
  out.chains = layers.empty() ? 0 : starts.size();
  if (m.assignments.size() != layers.size()) {
    out.layout_ok = false;
    return out;
  }
  std::vector<std::size_t> choice(layers.size());
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& a = m.assignments[k];
    const auto it = std::find(layers[k].segment.begin(), layers[k].segment.end(), a.segment);
    if (a.point_index != point_of_layer[k] || it == layers[k].segment.end()) {
      out.layout_ok = false;
      return out;
    }
    choice[k] = static_cast<std::size_t>(it - layers[k].segment.begin());
  }
  out.achieved = layers.empty() ? 0.0 : sequence_weight(layers, choice, starts, tr);
  return out;
}

}  // namespace oracle
