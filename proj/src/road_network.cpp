#include "roadpop/road_network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "roadpop/csv.hpp"
#include "roadpop/error.hpp"

namespace roadpop {

namespace detail {

std::vector<PolylinePoint> cache_polyline(std::span<const LatLon> polyline) {
  std::vector<PolylinePoint> out;
  out.reserve(polyline.size());
  for (const auto& q : polyline) {
    const double lat = deg_to_rad(q.lat);
    out.push_back({lat, deg_to_rad(q.lon), std::sin(lat), std::cos(lat)});
  }
  return out;
}

Projection project_polyline(const LatLon& p, std::span<const PolylinePoint> cached,
                            std::span<const LatLon> polyline) {
  const LocalProjection proj(p);
  // Small polylines dominate; avoid a heap allocation for them.
  constexpr std::size_t kInline = 16;
  PlanePoint inline_buf[kInline];
  std::vector<PlanePoint> heap_buf;
  PlanePoint* plane = inline_buf;
  if (cached.size() > kInline) {
    heap_buf.resize(cached.size());
    plane = heap_buf.data();
  }

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_vertex = 0;
  for (std::size_t i = 0; i < cached.size(); ++i) {
    const auto& c = cached[i];
    double rho = 0.0;
    plane[i] = proj.forward(c.lat_rad, c.lon_rad, c.sin_lat, c.cos_lat, rho);
    if (rho < best) {
      best = rho;
      best_vertex = i;
    }
  }

  bool interior = false;
  PlanePoint best_q{};
  for (std::size_t i = 0; i + 1 < cached.size(); ++i) {
    const PlanePoint a = plane[i];
    const PlanePoint b = plane[i + 1];
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    if (len2 <= 0.0) continue;
    const double t = -(a.x * dx + a.y * dy) / len2;
    if (!(t > 0.0 && t < 1.0)) continue;
    const PlanePoint q{a.x + t * dx, a.y + t * dy};
    const double d = std::hypot(q.x, q.y);
    if (d < best) {
      best = d;
      best_q = q;
      interior = true;
    }
  }
  if (!interior) return {polyline[best_vertex], best};
  return {proj.inverse(best_q), best};
}

}  // namespace detail

Projection project_to_segment(const LatLon& p, const RoadSegment& s) {
  const auto cached = detail::cache_polyline(s.polyline);
  return detail::project_polyline(p, cached, s.polyline);
}

std::string_view to_string(Adjacency a) {
  switch (a) {
    case Adjacency::same: return "same";
    case Adjacency::adjacent: return "adjacent";
    case Adjacency::disconnected: return "disconnected";
  }
  return "?";
}

namespace {

constexpr double kEndpointTolDeg = 1e-9;

bool coincide(const LatLon& a, const LatLon& b) {
  return std::abs(a.lat - b.lat) <= kEndpointTolDeg && std::abs(a.lon - b.lon) <= kEndpointTolDeg;
}

double polyline_length(std::span<const LatLon> line) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) total += geodesic_m(line[i], line[i + 1]);
  return total;
}

}  // namespace

RoadNetwork RoadNetwork::build(std::vector<Vertex> vertices, std::vector<SegmentRecord> records) {
  RoadNetwork net;
  std::sort(vertices.begin(), vertices.end(),
            [](const Vertex& a, const Vertex& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (i > 0 && vertices[i].id == vertices[i - 1].id) {
      throw NetworkLoadError("duplicate vertex id '" + vertices[i].id + "'", vertices[i].id);
    }
    if (!valid_coordinate(vertices[i].position)) {
      throw NetworkLoadError("vertex '" + vertices[i].id + "' has an out-of-range coordinate",
                             vertices[i].id);
    }
  }
  std::unordered_map<std::string, VertexIndex> vertex_by_id;
  vertex_by_id.reserve(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    vertex_by_id.emplace(vertices[i].id, static_cast<VertexIndex>(i));
  }

  std::sort(records.begin(), records.end(),
            [](const SegmentRecord& a, const SegmentRecord& b) { return a.id < b.id; });
  net.segments_.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = records[i];
    if (i > 0 && r.id == records[i - 1].id) {
      throw NetworkLoadError("duplicate segment id '" + r.id + "'", r.id, r.id);
    }
    const auto resolve = [&](const std::string& vid) {
      const auto it = vertex_by_id.find(vid);
      if (it == vertex_by_id.end()) {
        throw NetworkLoadError("segment '" + r.id + "' references unknown vertex '" + vid + "'", vid,
                               r.id);
      }
      return it->second;
    };
    RoadSegment seg;
    seg.id = r.id;
    seg.endpoint_a = resolve(r.vertex_a);
    seg.endpoint_b = resolve(r.vertex_b);
    const LatLon pa = vertices[seg.endpoint_a].position;
    const LatLon pb = vertices[seg.endpoint_b].position;
    if (r.polyline.empty()) {
      seg.polyline = {pa, pb};
    } else {
      seg.polyline = std::move(r.polyline);
    }
    if (seg.polyline.size() < 2) {
      throw NetworkLoadError("segment '" + r.id + "' polyline has fewer than 2 points", r.id, r.id);
    }
    for (const auto& q : seg.polyline) {
      if (!valid_coordinate(q)) {
        throw NetworkLoadError("segment '" + r.id + "' has an out-of-range coordinate", r.id, r.id);
      }
    }
    if (!coincide(seg.polyline.front(), pa) || !coincide(seg.polyline.back(), pb)) {
      throw NetworkLoadError(
          "segment '" + r.id + "' polyline does not start at vertex_a and end at vertex_b", r.id, r.id);
    }
    seg.length_m = polyline_length(seg.polyline);
    if (!(seg.length_m > 0.0)) {
      throw NetworkLoadError("segment '" + r.id + "' has zero length", r.id, r.id);
    }
    net.segment_by_id_.emplace(seg.id, static_cast<SegmentIndex>(i));
    net.segments_.push_back(std::move(seg));
  }
  net.vertices_ = std::move(vertices);
  net.build_index();
  net.loaded_ = true;
  return net;
}

void RoadNetwork::build_index() {
  cache_.clear();
  boxes_.clear();
  cache_.reserve(segments_.size());
  boxes_.reserve(segments_.size());
  extent_ = {90.0, 180.0, -90.0, -180.0};
  double span_sum = 0.0;
  for (const auto& s : segments_) {
    cache_.push_back(detail::cache_polyline(s.polyline));
    Box b{90.0, 180.0, -90.0, -180.0};
    double longest = 0.0;
    for (std::size_t i = 0; i < s.polyline.size(); ++i) {
      const auto& q = s.polyline[i];
      b.min_lat = std::min(b.min_lat, q.lat);
      b.max_lat = std::max(b.max_lat, q.lat);
      b.min_lon = std::min(b.min_lon, q.lon);
      b.max_lon = std::max(b.max_lon, q.lon);
      if (i + 1 < s.polyline.size()) longest = std::max(longest, geodesic_m(q, s.polyline[i + 1]));
    }
    // The chord between two vertices in a plane centred near the segment can
    // leave the vertex bounding box; pad by a bound on that deviation.
    const double pad_m = 0.5 + longest * longest / (2.0 * kEarthRadiusM);
    const double pad_lat = rad_to_deg(pad_m / kEarthRadiusM);
    const double cos_max = std::cos(deg_to_rad(std::max(std::abs(b.min_lat), std::abs(b.max_lat)) + pad_lat));
    const double pad_lon = cos_max > 1e-6 ? pad_lat / cos_max : 360.0;
    b.min_lat -= pad_lat;
    b.max_lat += pad_lat;
    b.min_lon -= pad_lon;
    b.max_lon += pad_lon;
    span_sum += std::max(b.max_lat - b.min_lat, b.max_lon - b.min_lon);
    extent_.min_lat = std::min(extent_.min_lat, b.min_lat);
    extent_.max_lat = std::max(extent_.max_lat, b.max_lat);
    extent_.min_lon = std::min(extent_.min_lon, b.min_lon);
    extent_.max_lon = std::max(extent_.max_lon, b.max_lon);
    boxes_.push_back(b);
  }
  cell_start_.clear();
  cell_items_.clear();
  if (segments_.empty()) {
    rows_ = cols_ = 0;
    return;
  }

  const double width = extent_.max_lon - extent_.min_lon;
  const double height = extent_.max_lat - extent_.min_lat;
  const double n = static_cast<double>(segments_.size());
  constexpr std::size_t kMaxCellsPerAxis = 2048;
  cell_deg_ = std::max({std::sqrt(width * height / n), span_sum / n, 1e-7});
  cell_deg_ = std::max({cell_deg_, width / kMaxCellsPerAxis, height / kMaxCellsPerAxis});
  cols_ = static_cast<std::size_t>(std::floor(width / cell_deg_)) + 1;
  rows_ = static_cast<std::size_t>(std::floor(height / cell_deg_)) + 1;

  const auto col_of = [&](double lon) {
    const double c = std::floor((lon - extent_.min_lon) / cell_deg_);
    return static_cast<std::size_t>(std::clamp(c, 0.0, static_cast<double>(cols_ - 1)));
  };
  const auto row_of = [&](double lat) {
    const double r = std::floor((lat - extent_.min_lat) / cell_deg_);
    return static_cast<std::size_t>(std::clamp(r, 0.0, static_cast<double>(rows_ - 1)));
  };

  std::vector<std::uint32_t> counts(rows_ * cols_ + 1, 0);
  for (const auto& b : boxes_) {
    for (auto r = row_of(b.min_lat); r <= row_of(b.max_lat); ++r)
      for (auto c = col_of(b.min_lon); c <= col_of(b.max_lon); ++c) ++counts[r * cols_ + c + 1];
  }
  for (std::size_t i = 1; i < counts.size(); ++i) counts[i] += counts[i - 1];
  cell_start_ = counts;
  cell_items_.resize(cell_start_.back());
  for (SegmentIndex s = 0; s < boxes_.size(); ++s) {
    const auto& b = boxes_[s];
    for (auto r = row_of(b.min_lat); r <= row_of(b.max_lat); ++r)
      for (auto c = col_of(b.min_lon); c <= col_of(b.max_lon); ++c)
        cell_items_[counts[r * cols_ + c]++] = s;
  }
}

std::optional<SegmentIndex> RoadNetwork::find_segment(std::string_view id) const {
  const auto it = segment_by_id_.find(std::string(id));
  if (it == segment_by_id_.end()) return std::nullopt;
  return it->second;
}

SegmentIndex RoadNetwork::segment_index(std::string_view id) const {
  if (auto i = find_segment(id)) return *i;
  throw InputError("unknown segment id '" + std::string(id) + "'");
}

Adjacency RoadNetwork::adjacency(std::string_view a, std::string_view b) const {
  return adjacency(segment_index(a), segment_index(b));
}

Projection RoadNetwork::project(const LatLon& p, SegmentIndex i) const {
  return detail::project_polyline(p, cache_[i], segments_[i].polyline);
}

std::vector<Candidate> RoadNetwork::candidates_near(const LatLon& p, double radius_m) const {
  std::vector<Candidate> out;
  if (segments_.empty() || !(radius_m > 0.0)) return out;

  const double cap = radius_m / kEarthRadiusM;
  const double dlat = rad_to_deg(cap) * (1.0 + 1e-9) + 1e-12;
  const double q_min_lat = p.lat - dlat;
  const double q_max_lat = p.lat + dlat;
  double q_min_lon = -360.0;
  double q_max_lon = 360.0;
  const double cos_lat = std::cos(deg_to_rad(p.lat));
  if (q_max_lat < 90.0 && q_min_lat > -90.0 && cos_lat > std::sin(cap)) {
    const double dlon = rad_to_deg(std::asin(std::sin(cap) / cos_lat)) * (1.0 + 1e-9) + 1e-12;
    q_min_lon = p.lon - dlon;
    q_max_lon = p.lon + dlon;
  }
  if (q_max_lat < extent_.min_lat || q_min_lat > extent_.max_lat || q_max_lon < extent_.min_lon ||
      q_min_lon > extent_.max_lon) {
    return out;
  }

  const auto cell = [&](double v, double origin, std::size_t count) {
    const double c = std::floor((v - origin) / cell_deg_);
    return static_cast<std::size_t>(std::clamp(c, 0.0, static_cast<double>(count - 1)));
  };
  const auto r0 = cell(q_min_lat, extent_.min_lat, rows_);
  const auto r1 = cell(q_max_lat, extent_.min_lat, rows_);
  const auto c0 = cell(q_min_lon, extent_.min_lon, cols_);
  const auto c1 = cell(q_max_lon, extent_.min_lon, cols_);

  std::vector<SegmentIndex> hits;
  for (auto r = r0; r <= r1; ++r) {
    for (auto c = c0; c <= c1; ++c) {
      const auto cid = r * cols_ + c;
      for (auto k = cell_start_[cid]; k < cell_start_[cid + 1]; ++k) {
        const auto s = cell_items_[k];
        const auto& b = boxes_[s];
        if (b.max_lat < q_min_lat || b.min_lat > q_max_lat || b.max_lon < q_min_lon ||
            b.min_lon > q_max_lon) {
          continue;
        }
        hits.push_back(s);
      }
    }
  }
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());

  for (const auto s : hits) {
    const auto proj = project(p, s);
    if (proj.distance_m <= radius_m) out.push_back({s, proj.point, proj.distance_m});
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.distance_m != b.distance_m) return a.distance_m < b.distance_m;
    return a.segment < b.segment;
  });
  return out;
}

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, fields)
};

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (csv::trim(line).empty()) continue;
    auto fields = csv::split_line(line);
    for (auto& f : fields) f = std::string(csv::trim(f));
    if (t.header.empty()) {
      t.header = std::move(fields);
    } else {
      t.rows.emplace_back(lineno, std::move(fields));
    }
  }
  if (t.header.empty()) throw InputError("'" + path.string() + "' is missing its header row");
  return t;
}

std::size_t column(const Table& t, const std::string& name, const std::filesystem::path& path) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) {
    throw InputError("'" + path.string() + "' header lacks column '" + name + "'");
  }
  return static_cast<std::size_t>(it - t.header.begin());
}

std::vector<LatLon> parse_polyline(std::string_view text, const std::string& where) {
  std::vector<LatLon> out;
  text = csv::trim(text);
  if (text.empty()) return out;
  for (const auto& pair : csv::split_line(text, ';')) {
    const auto body = csv::trim(pair);
    if (body.empty()) continue;
    const auto sp = body.find_first_of(" \t");
    if (sp == std::string_view::npos) throw InputError(where + ": malformed polyline point '" + std::string(body) + "'");
    const auto lon = csv::parse_double(body.substr(0, sp));
    const auto lat = csv::parse_double(body.substr(sp + 1));
    if (!lon || !lat) throw InputError(where + ": malformed polyline point '" + std::string(body) + "'");
    out.push_back({*lat, *lon});
  }
  return out;
}

}  // namespace

RoadNetwork load_network(const std::filesystem::path& vertices_csv,
                         const std::filesystem::path& segments_csv) {
  const auto vt = read_table(vertices_csv);
  const auto st = read_table(segments_csv);
  const auto vid = column(vt, "id", vertices_csv);
  const auto vlat = column(vt, "lat", vertices_csv);
  const auto vlon = column(vt, "lon", vertices_csv);
  std::vector<Vertex> vertices;
  vertices.reserve(vt.rows.size());
  for (const auto& [lineno, f] : vt.rows) {
    const std::string where = vertices_csv.string() + ":" + std::to_string(lineno);
    if (f.size() < vt.header.size()) throw InputError(where + ": expected " + std::to_string(vt.header.size()) + " fields");
    const auto lat = csv::parse_double(f[vlat]);
    const auto lon = csv::parse_double(f[vlon]);
    if (f[vid].empty() || !lat || !lon) throw InputError(where + ": malformed vertex row");
    vertices.push_back({f[vid], {*lat, *lon}});
  }

  const auto sid = column(st, "id", segments_csv);
  const auto sa = column(st, "vertex_a", segments_csv);
  const auto sb = column(st, "vertex_b", segments_csv);
  const auto sp = column(st, "polyline", segments_csv);
  std::vector<SegmentRecord> segments;
  segments.reserve(st.rows.size());
  for (const auto& [lineno, f] : st.rows) {
    const std::string where = segments_csv.string() + ":" + std::to_string(lineno);
    if (f.size() < 3 || f.size() < std::max({sid, sa, sb}) + 1) throw InputError(where + ": malformed segment row");
    SegmentRecord r{f[sid], f[sa], f[sb], {}};
    if (r.id.empty()) throw InputError(where + ": empty segment id");
    if (sp < f.size()) r.polyline = parse_polyline(f[sp], where);
    segments.push_back(std::move(r));
  }
  return RoadNetwork::build(std::move(vertices), std::move(segments));
}

RoadNetwork load_network_geojson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("'" + path.string() + "': " + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features")) {
    throw InputError("'" + path.string() + "' is not a FeatureCollection");
  }
  const auto id_string = [](const nlohmann::json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
  };
  std::map<std::string, LatLon> vertex_pos;
  std::vector<SegmentRecord> segments;
  for (const auto& feat : doc["features"]) {
    const auto& geom = feat.at("geometry");
    if (geom.value("type", "") != "LineString") {
      throw InputError("'" + path.string() + "': only LineString features are supported");
    }
    const auto& props = feat.at("properties");
    if (!props.contains("id") || !props.contains("vertex_a") || !props.contains("vertex_b")) {
      throw InputError("'" + path.string() + "': feature lacks id/vertex_a/vertex_b properties");
    }
    SegmentRecord r{id_string(props["id"]), id_string(props["vertex_a"]), id_string(props["vertex_b"]), {}};
    for (const auto& c : geom.at("coordinates")) {
      r.polyline.push_back({c.at(1).get<double>(), c.at(0).get<double>()});
    }
    if (r.polyline.size() < 2) {
      throw NetworkLoadError("segment '" + r.id + "' polyline has fewer than 2 points", r.id, r.id);
    }
    for (const auto& [vid, pos] : {std::pair{r.vertex_a, r.polyline.front()}, std::pair{r.vertex_b, r.polyline.back()}}) {
      const auto [it, inserted] = vertex_pos.emplace(vid, pos);
      if (!inserted && !coincide(it->second, pos)) {
        throw NetworkLoadError("vertex '" + vid + "' has inconsistent positions", vid, r.id);
      }
    }
    segments.push_back(std::move(r));
  }
  std::vector<Vertex> vertices;
  for (const auto& [vid, pos] : vertex_pos) vertices.push_back({vid, pos});
  return RoadNetwork::build(std::move(vertices), std::move(segments));
}

void write_network_csv(const RoadNetwork& net, const std::filesystem::path& vertices_csv,
                       const std::filesystem::path& segments_csv) {
  std::ofstream v(vertices_csv);
  std::ofstream s(segments_csv);
  if (!v || !s) throw InputError("cannot write network files");
  v << "id,lat,lon\n";
  for (const auto& vx : net.vertices()) {
    v << csv::quote(vx.id) << ',' << csv::format_double(vx.position.lat) << ','
      << csv::format_double(vx.position.lon) << '\n';
  }
  s << "id,vertex_a,vertex_b,polyline\n";
  for (const auto& seg : net.segments()) {
    std::string line;
    for (std::size_t i = 0; i < seg.polyline.size(); ++i) {
      if (i) line += ';';
      line += csv::format_double(seg.polyline[i].lon) + ' ' + csv::format_double(seg.polyline[i].lat);
    }
    s << csv::quote(seg.id) << ',' << csv::quote(net.vertices()[seg.endpoint_a].id) << ','
      << csv::quote(net.vertices()[seg.endpoint_b].id) << ',' << line << '\n';
  }
}

std::string canonical_serialization(const RoadNetwork& net) {
  std::ostringstream out;
  for (const auto& v : net.vertices()) {
    out << "V " << v.id << ' ' << csv::format_double(v.position.lat) << ' '
        << csv::format_double(v.position.lon) << '\n';
  }
  for (const auto& s : net.segments()) {
    out << "S " << s.id << ' ' << net.vertices()[s.endpoint_a].id << ' '
        << net.vertices()[s.endpoint_b].id << ' ' << csv::format_double(s.length_m);
    for (const auto& q : s.polyline) out << ' ' << csv::format_double(q.lon) << ' ' << csv::format_double(q.lat);
    out << '\n';
  }
  return out.str();
}

}  // namespace roadpop
