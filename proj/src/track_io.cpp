#include "roadpop/track_io.hpp"

#include <fstream>
#include <map>
#include <set>
#include <unordered_set>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <spdlog/spdlog.h>

#include "roadpop/csv.hpp"
#include "roadpop/error.hpp"

namespace roadpop {

namespace {

constexpr std::size_t kMaxWarnings = 20;

class WarningSink {
 public:
  explicit WarningSink(std::string name) : name_(std::move(name)) {}
  ~WarningSink() {
    if (count_ > kMaxWarnings) {
      spdlog::warn("{}: {} further malformed records suppressed", name_, count_ - kMaxWarnings);
    }
  }
  WarningSink(const WarningSink&) = delete;
  WarningSink& operator=(const WarningSink&) = delete;

  void operator()(std::size_t line, std::string_view what) {
    if (++count_ <= kMaxWarnings) spdlog::warn("{}:{}: skipped: {}", name_, line, what);
  }

 private:
  std::string name_;
  std::size_t count_ = 0;
};

std::string_view local_name(std::string_view tag) {
  const auto colon = tag.rfind(':');
  return colon == std::string_view::npos ? tag : tag.substr(colon + 1);
}

}  // namespace

std::optional<TrackFormat> parse_track_format(std::string_view s) {
  if (s == "csv") return TrackFormat::csv;
  if (s == "gpx") return TrackFormat::gpx;
  return std::nullopt;
}

ParseOutcome parse_tracks_csv(std::istream& in, const std::string& name) {
  ParseOutcome out;
  WarningSink warn(name);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  std::size_t c_track = 0, c_user = 0, c_kind = 0, c_time = 0, c_lat = 0, c_lon = 0;
  std::unordered_set<std::string> finished;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (csv::trim(line).empty()) continue;
    auto fields = csv::split_line(line);
    for (auto& f : fields) f = std::string(csv::trim(f));
    if (header.empty()) {
      header = fields;
      const auto col = [&](std::initializer_list<std::string_view> names) {
        for (auto n : names) {
          const auto it = std::find(header.begin(), header.end(), n);
          if (it != header.end()) return static_cast<std::size_t>(it - header.begin());
        }
        throw InputError(name + ": header lacks column '" + std::string(*names.begin()) + "'");
      };
      c_track = col({"track_id"});
      c_user = col({"user_id"});
      c_kind = col({"kind"});
      c_time = col({"timestamp_iso8601", "timestamp"});
      c_lat = col({"lat"});
      c_lon = col({"lon"});
      continue;
    }
    if (fields.size() != header.size()) {
      warn(lineno, "expected " + std::to_string(header.size()) + " fields");
      ++out.rejected_records;
      continue;
    }
    const auto& track_id = fields[c_track];
    const auto& user_id = fields[c_user];
    const auto kind = parse_activity_kind(fields[c_kind]);
    const auto time = parse_iso8601(fields[c_time]);
    const auto lat = csv::parse_double(fields[c_lat]);
    const auto lon = csv::parse_double(fields[c_lon]);
    std::string problem;
    if (track_id.empty() || user_id.empty()) {
      problem = "empty track or user id";
    } else if (!kind) {
      problem = "unknown kind '" + fields[c_kind] + "'";
    } else if (!time) {
      problem = "bad timestamp '" + fields[c_time] + "'";
    } else if (!lat || !lon || !valid_coordinate({*lat, *lon})) {
      problem = "invalid coordinate";
    }
    if (!problem.empty()) {
      warn(lineno, problem);
      ++out.rejected_records;
      continue;
    }
    if (out.tracks.empty() || out.tracks.back().track_id != track_id) {
      if (!out.tracks.empty()) finished.insert(out.tracks.back().track_id);
      if (finished.contains(track_id)) {
        throw InputError(name + ":" + std::to_string(lineno) + ": rows of track '" + track_id +
                         "' are not contiguous");
      }
      out.tracks.push_back(Track{track_id, user_id, *kind, {}});
    }
    auto& t = out.tracks.back();
    if (t.user_id != user_id || t.kind != *kind) {
      warn(lineno, "user or kind differs from earlier rows of track '" + track_id + "'");
      ++out.rejected_records;
      continue;
    }
    t.points.push_back({*time, {*lat, *lon}});
  }
  if (header.empty()) throw InputError(name + ": missing header row");
  return out;
}

namespace {

using boost::property_tree::ptree;

const ptree* child_named(const ptree& node, std::string_view name) {
  for (const auto& [tag, child] : node) {
    if (local_name(tag) == name) return &child;
  }
  return nullptr;
}

std::optional<std::string> text_of(const ptree& node, std::string_view name) {
  if (const auto* c = child_named(node, name)) return std::string(csv::trim(c->data()));
  return std::nullopt;
}

struct ManifestEntry {
  std::string user_id;
  ActivityKind kind;
};

std::map<std::string, ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest '" + path.string() + "'");
  std::map<std::string, ManifestEntry> out;
  std::string line;
  bool header = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto f = csv::split_line(line);
    const auto kind = f.size() >= 3 ? parse_activity_kind(f[2]) : std::nullopt;
    if (!kind) throw InputError(path.string() + ":" + std::to_string(lineno) + ": malformed manifest row");
    out[std::string(csv::trim(f[0]))] = {std::string(csv::trim(f[1])), *kind};
  }
  return out;
}

ParseOutcome parse_gpx(const std::filesystem::path& source, const TrackSourceOptions& options) {
  std::ifstream in(source);
  if (!in) throw InputError("cannot open '" + source.string() + "'");
  ptree doc;
  try {
    boost::property_tree::read_xml(in, doc);
  } catch (const boost::property_tree::xml_parser_error& e) {
    throw InputError(source.string() + ": XML syntax error: " + e.what());
  }
  const ptree* gpx = child_named(doc, "gpx");
  if (!gpx) throw InputError(source.string() + ": no <gpx> root element");
  std::map<std::string, ManifestEntry> manifest;
  if (options.manifest) manifest = read_manifest(*options.manifest);

  ParseOutcome out;
  WarningSink warn(source.string());
  std::size_t trk_index = 0;
  for (const auto& [tag, trk] : *gpx) {
    if (local_name(tag) != "trk") continue;
    ++trk_index;
    Track t;
    t.track_id = text_of(trk, "name").value_or("");
    if (t.track_id.empty()) t.track_id = source.stem().string() + "#" + std::to_string(trk_index);
    std::optional<ActivityKind> kind;
    std::optional<std::string> user;
    if (const auto* ext = child_named(trk, "extensions")) {
      user = text_of(*ext, "user_id");
      if (auto k = text_of(*ext, "kind")) kind = parse_activity_kind(*k);
    }
    if (!kind) {
      if (auto type = text_of(trk, "type")) kind = parse_activity_kind(*type);
    }
    if (const auto it = manifest.find(t.track_id); it != manifest.end()) {
      user = it->second.user_id;
      kind = it->second.kind;
    }
    if (!kind) kind = options.default_kind;
    if (!user || user->empty() || !kind) {
      warn(trk_index, "track '" + t.track_id + "' has no user id or kind");
      ++out.rejected_records;
      continue;
    }
    t.user_id = *user;
    t.kind = *kind;
    for (const auto& [stag, seg] : trk) {
      if (local_name(stag) != "trkseg") continue;
      for (const auto& [ptag, pt] : seg) {
        if (local_name(ptag) != "trkpt") continue;
        const auto lat = csv::parse_double(pt.get<std::string>("<xmlattr>.lat", ""));
        const auto lon = csv::parse_double(pt.get<std::string>("<xmlattr>.lon", ""));
        const auto time_text = text_of(pt, "time");
        const auto time = time_text ? parse_iso8601(*time_text) : std::nullopt;
        if (!lat || !lon || !valid_coordinate({*lat, *lon}) || !time) {
          warn(trk_index, "malformed point in track '" + t.track_id + "'");
          ++out.rejected_records;
          continue;
        }
        t.points.push_back({*time, {*lat, *lon}});
      }
    }
    out.tracks.push_back(std::move(t));
  }
  return out;
}

}  // namespace

ParseOutcome parse_tracks(const std::filesystem::path& source, TrackFormat format,
                          const TrackSourceOptions& options) {
  if (format == TrackFormat::gpx) return parse_gpx(source, options);
  std::ifstream in(source);
  if (!in) throw InputError("cannot open '" + source.string() + "'");
  return parse_tracks_csv(in, source.string());
}

void write_tracks_csv(std::span<const Track> tracks, std::ostream& out) {
  out << "track_id,user_id,kind,timestamp_iso8601,lat,lon\n";
  for (const auto& t : tracks) {
    const auto id = csv::quote(t.track_id);
    const auto user = csv::quote(t.user_id);
    for (const auto& p : t.points) {
      out << id << ',' << user << ',' << to_string(t.kind) << ',' << format_iso8601(p.time) << ','
          << csv::format_double(p.position.lat) << ',' << csv::format_double(p.position.lon) << '\n';
    }
  }
}

void write_tracks_csv(std::span<const Track> tracks, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  write_tracks_csv(tracks, out);
}

}  // namespace roadpop
