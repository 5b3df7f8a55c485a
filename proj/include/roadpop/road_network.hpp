#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "roadpop/geo.hpp"

namespace roadpop {

/// Dense index into RoadNetwork::segments(). Indices follow ascending
/// segment-id order, so comparing indices compares ids.
using SegmentIndex = std::uint32_t;
using VertexIndex = std::uint32_t;

struct Vertex {
  std::string id;
  LatLon position;
};

/// A segment as read from a source file, before id resolution.
struct SegmentRecord {
  std::string id;
  std::string vertex_a;
  std::string vertex_b;
  std::vector<LatLon> polyline;  // empty means straight between the endpoints
};

struct RoadSegment {
  std::string id;
  VertexIndex endpoint_a = 0;
  VertexIndex endpoint_b = 0;
  std::vector<LatLon> polyline;
  double length_m = 0.0;
};

enum class Adjacency { same, adjacent, disconnected };

struct Projection {
  LatLon point;
  double distance_m = 0.0;
};

struct Candidate {
  SegmentIndex segment = 0;
  LatLon point;
  double distance_m = 0.0;
};

namespace detail {
struct PolylinePoint {
  double lat_rad;
  double lon_rad;
  double sin_lat;
  double cos_lat;
};
std::vector<PolylinePoint> cache_polyline(std::span<const LatLon> polyline);
Projection project_polyline(const LatLon& p, std::span<const PolylinePoint> cached,
                            std::span<const LatLon> polyline);
}  // namespace detail

/// Nearest point on the polyline of `s` to `p`. The polyline is projected
/// into an azimuthal equidistant plane centred on `p`; vertex distances are
/// exact great-circle distances.
Projection project_to_segment(const LatLon& p, const RoadSegment& s);

/// Immutable, validated road graph with a uniform-grid spatial index over
/// segment bounding boxes. Safe to share across threads once built.
class RoadNetwork {
 public:
  RoadNetwork() = default;

  /// Validates ids, endpoint references and polylines, computes lengths and
  /// builds the spatial index. Throws NetworkLoadError.
  static RoadNetwork build(std::vector<Vertex> vertices, std::vector<SegmentRecord> segments);

  bool loaded() const { return loaded_; }

  std::span<const Vertex> vertices() const { return vertices_; }
  std::span<const RoadSegment> segments() const { return segments_; }
  const RoadSegment& segment(SegmentIndex i) const { return segments_.at(i); }
  std::size_t segment_count() const { return segments_.size(); }

  std::optional<SegmentIndex> find_segment(std::string_view id) const;
  /// Throws InputError for an unknown id.
  SegmentIndex segment_index(std::string_view id) const;

  Adjacency adjacency(SegmentIndex a, SegmentIndex b) const {
    if (a == b) return Adjacency::same;
    const auto& sa = segments_[a];
    const auto& sb = segments_[b];
    const bool shared = sa.endpoint_a == sb.endpoint_a || sa.endpoint_a == sb.endpoint_b ||
                        sa.endpoint_b == sb.endpoint_a || sa.endpoint_b == sb.endpoint_b;
    return shared ? Adjacency::adjacent : Adjacency::disconnected;
  }
  /// Id-based form; throws InputError for unknown ids.
  Adjacency adjacency(std::string_view a, std::string_view b) const;

  /// Segments whose projection distance to `p` is <= radius_m, ascending by
  /// distance, ties by segment id. Requires radius_m > 0.
  std::vector<Candidate> candidates_near(const LatLon& p, double radius_m) const;

  /// Projection using the per-segment trigonometric cache. Bit-identical to
  /// project_to_segment(p, segment(i)).
  Projection project(const LatLon& p, SegmentIndex i) const;

 private:
  struct Box {
    double min_lat, min_lon, max_lat, max_lon;
  };

  void build_index();

  bool loaded_ = false;
  std::vector<Vertex> vertices_;
  std::vector<RoadSegment> segments_;
  std::unordered_map<std::string, SegmentIndex> segment_by_id_;

  std::vector<std::vector<detail::PolylinePoint>> cache_;
  std::vector<Box> boxes_;
  Box extent_{};
  double cell_deg_ = 1.0;
  std::size_t cols_ = 0;
  std::size_t rows_ = 0;
  std::vector<std::uint32_t> cell_start_;  // CSR offsets, rows_*cols_ + 1
  std::vector<SegmentIndex> cell_items_;
};

/// Loads `id,lat,lon` and `id,vertex_a,vertex_b,polyline` delimited files
/// (header rows required; polyline is `lon lat;lon lat;...`).
RoadNetwork load_network(const std::filesystem::path& vertices_csv,
                         const std::filesystem::path& segments_csv);

/// Loads a GeoJSON FeatureCollection of LineString features carrying `id`,
/// `vertex_a` and `vertex_b` properties. Vertex positions come from the line
/// endpoints.
RoadNetwork load_network_geojson(const std::filesystem::path& path);

void write_network_csv(const RoadNetwork& net, const std::filesystem::path& vertices_csv,
                       const std::filesystem::path& segments_csv);

/// Stable text form of the whole network (ids, coordinates, lengths).
std::string canonical_serialization(const RoadNetwork& net);

std::string_view to_string(Adjacency a);

}  // namespace roadpop
