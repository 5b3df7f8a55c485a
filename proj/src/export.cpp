#include "roadpop/export.hpp"

#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "roadpop/csv.hpp"
#include "roadpop/error.hpp"

namespace roadpop {

std::string geojson_filename(ActivityKind kind, Scope scope) {
  return "popularity_" + std::string(to_string(kind)) + "_" + std::string(to_string(scope)) + ".geojson";
}

std::string export_geojson(const RoadNetwork& net, std::span<const PopularityScore> scores, Scope scope,
                           ActivityKind kind, std::size_t k) {
  if (k == 0) throw std::invalid_argument("class count must be >= 1");
  std::map<std::string_view, const PopularityScore*> by_segment;
  for (const auto& s : scores) {
    if (s.scope == scope && s.kind == kind) by_segment[s.segment_id] = &s;
  }

  std::vector<double> values;
  values.reserve(net.segment_count());
  for (const auto& seg : net.segments()) {
    const auto it = by_segment.find(seg.id);
    values.push_back(it == by_segment.end() ? 0.0 : static_cast<double>(it->second->p_index));
  }
  const std::size_t distinct = distinct_count(values);
  const std::size_t k_used = std::max<std::size_t>(1, std::min(k, distinct));
  const ClassBreaks breaks = values.empty() ? ClassBreaks{} : jenks_breaks(values, k_used);

  using ojson = nlohmann::ordered_json;
  ojson head;
  head["type"] = "FeatureCollection";
  head["name"] = geojson_filename(kind, scope).substr(0, geojson_filename(kind, scope).size() - 8);
  head["kind"] = to_string(kind);
  head["scope"] = to_string(scope);
  head["classes"] = breaks.k;
  head["breaks"] = breaks.breaks;
  std::string text = head.dump();
  text.pop_back();  // reopen the object to append the features
  text += ",\"features\":[";

  const auto segments = net.segments();
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& seg = segments[i];
    const auto it = by_segment.find(seg.id);
    const PopularityScore* sc = it == by_segment.end() ? nullptr : it->second;
    ojson coords = ojson::array();
    for (const auto& q : seg.polyline) coords.push_back({q.lon, q.lat});
    ojson f;
    f["type"] = "Feature";
    f["geometry"] = {{"type", "LineString"}, {"coordinates", std::move(coords)}};
    f["properties"] = {{"segment_id", seg.id},
                       {"p_index", sc ? sc->p_index : 0},
                       {"class", breaks.class_of(values[i])},
                       {"user_count", sc ? sc->user_count : 0},
                       {"activity_count", sc ? sc->activity_count : 0}};
    text += i == 0 ? "\n" : ",\n";
    text += f.dump();
  }
  text += "\n]}\n";
  return text;
}

std::string export_geojson(const RoadNetwork& net, std::span<const PopularityScore> scores,
                           std::string_view scope, std::string_view kind, std::size_t k) {
  const auto sc = parse_scope(scope);
  const auto kd = parse_activity_kind(kind);
  if (!sc) throw std::invalid_argument("unknown scope '" + std::string(scope) + "'");
  if (!kd || to_string(*kd) != kind) throw std::invalid_argument("unknown kind '" + std::string(kind) + "'");
  return export_geojson(net, scores, *sc, *kd, k);
}

std::int64_t HourHistogram::total() const {
  std::int64_t n = 0;
  for (auto b : bins) n += b;
  return n;
}

HourHistogram hourly_histogram(std::span<const Track> tracks, ActivityKind kind) {
  HourHistogram h;
  h.kind = kind;
  for (const auto& t : tracks) {
    if (t.kind != kind || t.points.empty()) continue;
    ++h.bins[static_cast<std::size_t>(t.points.front().time.local_hour())];
  }
  return h;
}

std::int64_t PeriodSummary::count(Period p, ActivityKind k) const {
  if (p == Period::crossing) return crossing[static_cast<std::size_t>(k)];
  return counts[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)];
}

PeriodSummary period_summary(std::span<const PeriodRecord> records) {
  PeriodSummary s;
  for (const auto& r : records) {
    const auto k = static_cast<std::size_t>(r.kind);
    if (r.period == Period::crossing) {
      ++s.crossing[k];
    } else {
      ++s.counts[static_cast<std::size_t>(r.period)][k];
    }
  }
  for (const auto& row : s.counts) {
    s.total[0] += row[0];
    s.total[1] += row[1];
  }
  return s;
}

void write_histogram_csv(const HourHistogram& h, std::ostream& out) {
  out << "hour,count\n";
  for (std::size_t i = 0; i < h.bins.size(); ++i) out << i << ',' << h.bins[i] << '\n';
}

void write_period_summary_csv(const PeriodSummary& s, std::ostream& out) {
  out << "period,walk_run,cycle\n";
  for (std::size_t i = 0; i < kDayPeriods.size(); ++i) {
    out << to_string(kDayPeriods[i]) << ',' << s.counts[i][0] << ',' << s.counts[i][1] << '\n';
  }
  out << "total," << s.total[0] << ',' << s.total[1] << '\n';
}

void write_scores_csv(std::span<const PopularityScore> scores, std::ostream& out) {
  out << "segment_id,kind,scope,p_index,user_count,activity_count\n";
  for (const auto& s : scores) {
    out << csv::quote(s.segment_id) << ',' << to_string(s.kind) << ',' << to_string(s.scope) << ','
        << s.p_index << ',' << s.user_count << ',' << s.activity_count << '\n';
  }
}

std::vector<PopularityScore> read_scores_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::vector<PopularityScore> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 || csv::trim(line).empty()) continue;
    const auto f = csv::split_line(csv::trim(line));
    const auto fail = [&] {
      return InputError(path.string() + ":" + std::to_string(lineno) + ": malformed score row");
    };
    if (f.size() != 6) throw fail();
    const auto kind = parse_activity_kind(f[1]);
    const auto scope = parse_scope(f[2]);
    if (!kind || !scope) throw fail();
    PopularityScore s{f[0], *scope, *kind, 0, 0, 0};
    try {
      s.p_index = std::stoll(f[3]);
      s.user_count = std::stoll(f[4]);
      s.activity_count = std::stoll(f[5]);
    } catch (const std::exception&) {
      throw fail();
    }
    out.push_back(std::move(s));
  }
  return out;
}

ActivityUsage to_usage(const RoadNetwork& net, const MatchedActivity& m) {
  ActivityUsage u{m.user_id, m.kind, m.period, {}};
  u.traversed.reserve(m.matched.traversed.size());
  for (auto s : m.matched.traversed) u.traversed.push_back(net.segment(s).id);
  return u;
}

void write_matched_csv(const RoadNetwork& net, std::span<const MatchedActivity> matched, std::ostream& out) {
  out << "track_id,point_index,segment_id,distance_m\n";
  for (const auto& m : matched) {
    const auto id = csv::quote(m.matched.track_id);
    for (const auto& a : m.matched.assignments) {
      out << id << ',' << a.point_index << ',' << csv::quote(net.segment(a.segment).id) << ','
          << csv::format_fixed(a.distance_m, 3) << '\n';
    }
    std::string traversed;
    for (std::size_t i = 0; i < m.matched.traversed.size(); ++i) {
      if (i) traversed += ';';
      traversed += net.segment(m.matched.traversed[i]).id;
    }
    out << "#track," << id << ',' << csv::quote(m.user_id) << ',' << to_string(m.kind) << ','
        << to_string(m.period) << ',' << m.matched.break_count << ',' << csv::quote(traversed) << '\n';
  }
}

std::vector<ActivityUsage> read_matched_summaries(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::vector<ActivityUsage> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.rfind("#track,", 0) != 0) continue;
    const auto f = csv::split_line(csv::trim(line));
    const auto kind = f.size() == 7 ? parse_activity_kind(f[3]) : std::nullopt;
    const auto period = f.size() == 7 ? parse_period(f[4]) : std::nullopt;
    if (!kind || !period) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": malformed #track line");
    }
    ActivityUsage u{f[2], *kind, *period, {}};
    if (!f[6].empty()) {
      for (auto& id : csv::split_line(f[6], ';')) u.traversed.push_back(std::move(id));
    }
    out.push_back(std::move(u));
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw InputError("failed writing '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace roadpop
