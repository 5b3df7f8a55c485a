#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "roadpop/road_network.hpp"
#include "roadpop/tracks.hpp"

namespace roadpop {

/// Deterministic random source. Engine is std::mt19937_64 (bit-exact across
/// standard libraries); the transforms are spelled out here so that fixtures
/// can be regenerated by other implementations:
///   uniform()  = (next >> 11) * 2^-53
///   normal()   = sqrt(-2 ln(1 - u1)) * cos(2 pi u2), two fresh uniforms
///   below(n)   = min(n - 1, floor(uniform() * n))
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();
  double normal();
  std::size_t below(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

struct GridSpec {
  std::size_t rows = 6;  // vertices per column
  std::size_t cols = 10; // vertices per row
  double spacing_m = 200.0;
  LatLon origin{30.5, 114.3};
  /// Keep only the first N segments (horizontal row-major, then vertical
  /// column-major); 0 keeps all.
  std::size_t max_segments = 0;
};

/// Straight two-point segments on a regular grid. Vertex ids `n<row>_<col>`,
/// segment ids `h<row>_<col>` (horizontal) and `v<col>_<row>` (vertical),
/// zero padded so that id order equals creation order.
RoadNetwork make_grid_network(const GridSpec& spec);

enum class KindMix { walk_run, cycle, mixed };

struct SynthParams {
  std::size_t users = 50;
  std::size_t activities = 20;          // per user
  double noise_m = 15.0;                // isotropic Gaussian std. dev.
  double spacing_m = 10.0;              // along-road distance between samples
  std::size_t points_per_track = 100;
  double walk_speed_min_kmh = 5.0;
  double walk_speed_max_kmh = 12.0;
  double cycle_speed_min_kmh = 12.0;
  double cycle_speed_max_kmh = 28.0;
  KindMix kinds = KindMix::mixed;       // mixed: even users walk/run, odd users cycle
  std::uint64_t seed = 42;
  std::int32_t utc_offset_min = 480;
};

struct GroundTruth {
  std::string track_id;
  std::vector<SegmentIndex> point_segments;  // true segment of every point
  std::vector<SegmentIndex> traversed;       // point_segments, duplicates collapsed
};

struct SynthOutput {
  std::vector<Track> tracks;
  std::vector<GroundTruth> truth;
};

/// Random walks along adjacent segments (no immediate U-turn except at dead
/// ends), sampled every spacing_m and perturbed with Gaussian noise. Throws
/// InputError when the network has nothing to walk on.
SynthOutput synthesize(const RoadNetwork& net, const SynthParams& params);

/// `track_id,traversed` with ids ';'-joined.
void write_ground_truth_csv(const RoadNetwork& net, const std::vector<GroundTruth>& truth, std::ostream& out);
/// `track_id,point_index,segment_id`
void write_ground_truth_points_csv(const RoadNetwork& net, const std::vector<GroundTruth>& truth,
                                   std::ostream& out);

}  // namespace roadpop
