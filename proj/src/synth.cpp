#include "roadpop/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "roadpop/error.hpp"

namespace roadpop {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::below(std::size_t n) {
  const auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return std::min(n - 1, k);
}

namespace {

std::string padded(const char* prefix, std::size_t a, std::size_t b) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%04zu_%04zu", prefix, a, b);
  return buf;
}

std::string numbered(const char* prefix, std::size_t a) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%04zu", prefix, a);
  return buf;
}

}  // namespace

RoadNetwork make_grid_network(const GridSpec& spec) {
  std::vector<Vertex> vertices;
  for (std::size_t r = 0; r < spec.rows; ++r) {
    for (std::size_t c = 0; c < spec.cols; ++c) {
      vertices.push_back({padded("n", r, c), offset_m(spec.origin, static_cast<double>(r) * spec.spacing_m,
                                                      static_cast<double>(c) * spec.spacing_m)});
    }
  }
  const auto pos = [&](std::size_t r, std::size_t c) { return vertices[r * spec.cols + c].position; };
  std::vector<SegmentRecord> segments;
  const auto full = [&] { return spec.max_segments != 0 && segments.size() >= spec.max_segments; };
  for (std::size_t r = 0; r < spec.rows && !full(); ++r) {
    for (std::size_t c = 0; c + 1 < spec.cols && !full(); ++c) {
      segments.push_back({padded("h", r, c), padded("n", r, c), padded("n", r, c + 1), {pos(r, c), pos(r, c + 1)}});
    }
  }
  for (std::size_t c = 0; c < spec.cols && !full(); ++c) {
    for (std::size_t r = 0; r + 1 < spec.rows && !full(); ++r) {
      segments.push_back({padded("v", c, r), padded("n", r, c), padded("n", r + 1, c), {pos(r, c), pos(r + 1, c)}});
    }
  }
  return RoadNetwork::build(std::move(vertices), std::move(segments));
}

namespace {

/// A position on a segment, `along_m` from the end we entered through.
struct Cursor {
  SegmentIndex segment;
  bool reversed;  // entered through endpoint_b
  double along_m;
};

LatLon point_along(const RoadSegment& seg, bool reversed, double along_m) {
  const auto& line = seg.polyline;
  const std::size_t n = line.size();
  double remaining = reversed ? seg.length_m - along_m : along_m;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double len = geodesic_m(line[i], line[i + 1]);
    if (remaining <= len || i + 2 == n) {
      const double f = len > 0.0 ? std::clamp(remaining / len, 0.0, 1.0) : 0.0;
      return {line[i].lat + f * (line[i + 1].lat - line[i].lat), line[i].lon + f * (line[i + 1].lon - line[i].lon)};
    }
    remaining -= len;
  }
  return line.back();
}

}  // namespace

SynthOutput synthesize(const RoadNetwork& net, const SynthParams& params) {
  if (!net.loaded() || net.segment_count() == 0) {
    throw InputError("network has no segments to walk on");
  }
  if (params.points_per_track < 1 || !(params.spacing_m > 0.0)) {
    throw InputError("synth needs points_per_track >= 1 and spacing_m > 0");
  }
  const auto segments = net.segments();
  std::vector<std::vector<SegmentIndex>> incident(net.vertices().size());
  for (SegmentIndex s = 0; s < segments.size(); ++s) {
    incident[segments[s].endpoint_a].push_back(s);
    if (segments[s].endpoint_b != segments[s].endpoint_a) incident[segments[s].endpoint_b].push_back(s);
  }

  Rng rng(params.seed);
  SynthOutput out;
  const std::int64_t base_day = days_from_civil(2017, 9, 1);
  for (std::size_t u = 0; u < params.users; ++u) {
    ActivityKind kind = ActivityKind::walk_run;
    if (params.kinds == KindMix::cycle || (params.kinds == KindMix::mixed && u % 2 == 1)) {
      kind = ActivityKind::cycle;
    }
    const double vmin = kind == ActivityKind::cycle ? params.cycle_speed_min_kmh : params.walk_speed_min_kmh;
    const double vmax = kind == ActivityKind::cycle ? params.cycle_speed_max_kmh : params.walk_speed_max_kmh;
    for (std::size_t a = 0; a < params.activities; ++a) {
      Track t;
      t.track_id = padded("t", u, a);
      t.user_id = numbered("u", u);
      t.kind = kind;
      GroundTruth truth;
      truth.track_id = t.track_id;

      Cursor cur{static_cast<SegmentIndex>(rng.below(segments.size())), rng.below(2) == 1, 0.0};
      cur.along_m = (0.2 + 0.6 * rng.uniform()) * segments[cur.segment].length_m;
      const double speed_ms = (vmin + (vmax - vmin) * rng.uniform()) / 3.6;
      const double dt_s = params.spacing_m / speed_ms;
      const auto start_sod = static_cast<std::int64_t>(rng.uniform() * 86400.0);
      const std::int64_t day = base_day + static_cast<std::int64_t>(a % 30);
      const std::int64_t start_ms =
          (day * 86400 + start_sod) * 1000 - std::int64_t{params.utc_offset_min} * 60'000;

      for (std::size_t k = 0; k < params.points_per_track; ++k) {
        if (k > 0) {
          cur.along_m += params.spacing_m;
          while (cur.along_m > segments[cur.segment].length_m) {
            cur.along_m -= segments[cur.segment].length_m;
            const auto& seg = segments[cur.segment];
            const VertexIndex exit = cur.reversed ? seg.endpoint_a : seg.endpoint_b;
            std::vector<SegmentIndex> options;
            for (auto s : incident[exit]) {
              if (s != cur.segment) options.push_back(s);
            }
            SegmentIndex next = cur.segment;
            if (!options.empty()) next = options[rng.below(options.size())];
            cur.segment = next;
            cur.reversed = segments[next].endpoint_a != exit;
          }
        }
        const LatLon truth_pos = point_along(segments[cur.segment], cur.reversed, cur.along_m);
        LatLon observed = truth_pos;
        if (params.noise_m > 0.0) {
          const double north = params.noise_m * rng.normal();
          const double east = params.noise_m * rng.normal();
          observed = offset_m(truth_pos, north, east);
        }
        const auto ms = start_ms + std::llround(static_cast<double>(k) * dt_s * 1000.0);
        t.points.push_back({Timestamp{ms, params.utc_offset_min}, observed});
        truth.point_segments.push_back(cur.segment);
      }
      for (auto s : truth.point_segments) {
        if (truth.traversed.empty() || truth.traversed.back() != s) truth.traversed.push_back(s);
      }
      out.tracks.push_back(std::move(t));
      out.truth.push_back(std::move(truth));
    }
  }
  return out;
}

void write_ground_truth_csv(const RoadNetwork& net, const std::vector<GroundTruth>& truth, std::ostream& out) {
  out << "track_id,traversed\n";
  for (const auto& g : truth) {
    out << g.track_id << ',';
    for (std::size_t i = 0; i < g.traversed.size(); ++i) {
      if (i) out << ';';
      out << net.segment(g.traversed[i]).id;
    }
    out << '\n';
  }
}

void write_ground_truth_points_csv(const RoadNetwork& net, const std::vector<GroundTruth>& truth,
                                   std::ostream& out) {
  out << "track_id,point_index,segment_id\n";
  for (const auto& g : truth) {
    for (std::size_t i = 0; i < g.point_segments.size(); ++i) {
      out << g.track_id << ',' << i << ',' << net.segment(g.point_segments[i]).id << '\n';
    }
  }
}

}  // namespace roadpop
