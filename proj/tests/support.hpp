// Shared builders for tests.
#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "roadpop/road_network.hpp"
#include "roadpop/tracks.hpp"

namespace support {

inline const roadpop::LatLon kOrigin{30.5, 114.3};

inline std::string id(const char* prefix, std::size_t i) {
  std::ostringstream o;
  o << prefix << i;
  return o.str();
}

/// Random segments inside a square of `extent_m` meters: vertices scattered
/// uniformly, segments between random vertex pairs, some with a bent
/// interior point. Vertices are shared, so adjacency is non-trivial.
inline roadpop::RoadNetwork random_network(std::mt19937_64& rng, std::size_t n_vertices,
                                           std::size_t n_segments, double extent_m) {
  std::uniform_real_distribution<double> u(0.0, extent_m);
  std::uniform_int_distribution<std::size_t> pick(0, n_vertices - 1);
  std::vector<roadpop::Vertex> vs;
  for (std::size_t i = 0; i < n_vertices; ++i) vs.push_back({id("v", i), roadpop::offset_m(kOrigin, u(rng), u(rng))});
  std::vector<roadpop::SegmentRecord> ss;
  for (std::size_t i = 0; i < n_segments; ++i) {
    std::size_t a = pick(rng), b = pick(rng);
    while (b == a) b = pick(rng);
    roadpop::SegmentRecord r{id("s", i), vs[a].id, vs[b].id, {}};
    if (rng() % 3 == 0) {
      const auto& pa = vs[a].position;
      const auto& pb = vs[b].position;
      const roadpop::LatLon mid{(pa.lat + pb.lat) / 2, (pa.lon + pb.lon) / 2};
      std::uniform_real_distribution<double> bend(-0.2 * extent_m, 0.2 * extent_m);
      r.polyline = {pa, roadpop::offset_m(mid, bend(rng), bend(rng)), pb};
    }
    ss.push_back(std::move(r));
  }
  return roadpop::RoadNetwork::build(std::move(vs), std::move(ss));
}

inline roadpop::TrackPoint point(const roadpop::LatLon& p, std::int64_t local_s, std::int32_t offset_min = 480) {
  roadpop::TrackPoint tp;
  tp.position = p;
  tp.time.offset_min = offset_min;
  tp.time.utc_ms = (local_s - offset_min * 60LL) * 1000;
  return tp;
}

/// Track whose points are `step_m` apart heading east at `speed_kmh`,
/// starting at local time `start_s` on 1970-01-02.
inline roadpop::Track straight_track(std::string track_id, std::string user, roadpop::ActivityKind kind,
                                     std::size_t n, double step_m, double speed_kmh,
                                     std::int64_t start_s = 86400 + 8 * 3600) {
  roadpop::Track t{std::move(track_id), std::move(user), kind, {}};
  const double dt_ms = step_m / (speed_kmh / 3.6) * 1000.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto tp = point(roadpop::offset_m(kOrigin, 0, step_m * double(i)), start_s);
    tp.time.utc_ms += static_cast<std::int64_t>(std::llround(dt_ms * double(i)));
    t.points.push_back(tp);
  }
  return t;
}

inline std::filesystem::path fixture(const std::string& rel) {
  return std::filesystem::path(ROADPOP_FIXTURES) / rel;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream o;
  o << in.rdbuf();
  return o.str();
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("roadpop_test_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

inline void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace support
