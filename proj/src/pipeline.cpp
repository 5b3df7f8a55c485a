#include "roadpop/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "roadpop/batch.hpp"
#include "roadpop/csv.hpp"
#include "roadpop/error.hpp"

namespace roadpop {

namespace {

std::filesystem::path resolve(std::string_view text, const std::filesystem::path& base_dir) {
  std::filesystem::path p{std::string(csv::trim(text))};
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  return p;
}

double number(std::string_view key, std::string_view value) {
  const auto v = csv::parse_double(value);
  if (!v) throw InputError("config key '" + std::string(key) + "': '" + std::string(value) + "' is not a number");
  return *v;
}

void require_file(const std::filesystem::path& p, std::string_view what) {
  if (!std::filesystem::is_regular_file(p)) {
    throw InputError(std::string(what) + " '" + p.string() + "' does not exist");
  }
}

class StageTimer {
 public:
  explicit StageTimer(RunReport& report) : report_(report) {}
  void lap(std::string name) {
    const auto now = std::chrono::steady_clock::now();
    report_.stage_seconds.emplace_back(std::move(name), std::chrono::duration<double>(now - last_).count());
    last_ = now;
  }

 private:
  RunReport& report_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

TrackSource parse_track_source(std::string_view spec, const std::filesystem::path& base_dir) {
  const auto parts = csv::split_line(spec);
  if (parts.size() < 2 || parts.size() > 4) {
    throw InputError("track_source must be 'path, format[, kind[, manifest]]': '" + std::string(spec) + "'");
  }
  TrackSource src;
  src.path = resolve(parts[0], base_dir);
  const auto fmt = parse_track_format(csv::trim(parts[1]));
  if (!fmt) throw InputError("unknown track format '" + parts[1] + "'");
  src.format = *fmt;
  if (parts.size() >= 3 && !csv::trim(parts[2]).empty()) {
    src.kind = parse_activity_kind(parts[2]);
    if (!src.kind) throw InputError("unknown activity kind '" + parts[2] + "'");
  }
  if (parts.size() == 4 && !csv::trim(parts[3]).empty()) src.manifest = resolve(parts[3], base_dir);
  return src;
}

void PipelineConfig::set(std::string_view key, std::string_view value, const std::filesystem::path& base_dir) {
  value = csv::trim(value);
  if (key == "vertices") {
    vertices = resolve(value, base_dir);
  } else if (key == "segments") {
    segments = resolve(value, base_dir);
  } else if (key == "network_geojson") {
    network_geojson = resolve(value, base_dir);
  } else if (key == "track_source") {
    sources.push_back(parse_track_source(value, base_dir));
  } else if (key == "cleaning_config") {
    cleaning = CleaningConfig::load(resolve(value, base_dir));
  } else if (key == "period_bounds") {
    const auto parts = csv::split_line(value);
    if (parts.size() != 4) throw InputError("period_bounds needs four hours, e.g. 6,10,16,20");
    std::array<double, 4> h{};
    for (std::size_t i = 0; i < 4; ++i) h[i] = number(key, parts[i]);
    periods = PeriodScheme::from_hours(h);
  } else if (key == "classes") {
    const double v = number(key, value);
    if (v < 1 || v != std::floor(v)) throw InputError("classes must be a positive integer");
    classes = static_cast<std::size_t>(v);
  } else if (key == "out") {
    out_dir = resolve(value, base_dir);
  } else if (key == "workers") {
    const double v = number(key, value);
    if (v < 1 || v != std::floor(v)) throw InputError("workers must be an integer >= 1");
    workers = static_cast<int>(v);
  } else if (key == "dump_matched") {
    dump_matched = value == "true" || value == "1" || value == "yes";
  } else if (CleaningConfig probe; probe.set(key, 0.0)) {
    cleaning.set(key, number(key, value));
  } else if (MatcherConfig probe; probe.set(key, 0.0)) {
    matcher.set(key, number(key, value));
  } else {
    throw InputError("unknown config key '" + std::string(key) + "'");
  }
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path.string() + "'");
  PipelineConfig cfg;
  cfg.workers = default_workers();
  const auto base = path.parent_path();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = csv::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    try {
      cfg.set(csv::trim(body.substr(0, eq)), body.substr(eq + 1), base);
    } catch (const InputError& e) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

void PipelineConfig::validate() const {
  if (network_geojson.empty()) {
    if (vertices.empty() || segments.empty()) {
      throw InputError("config must name either network_geojson or both vertices and segments");
    }
    require_file(vertices, "vertex file");
    require_file(segments, "segment file");
  } else {
    require_file(network_geojson, "network file");
  }
  for (const auto& s : sources) {
    require_file(s.path, "track source");
    if (s.manifest) require_file(*s.manifest, "manifest");
  }
  if (workers < 1) throw InputError("workers must be >= 1");
  if (classes < 1) throw InputError("classes must be >= 1");
  try {
    matcher.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::echo() const {
  std::vector<std::pair<std::string, std::string>> out;
  if (!network_geojson.empty()) {
    out.emplace_back("network_geojson", network_geojson.string());
  } else {
    out.emplace_back("vertices", vertices.string());
    out.emplace_back("segments", segments.string());
  }
  for (const auto& s : sources) {
    std::string v = s.path.string() + "," + (s.format == TrackFormat::gpx ? "gpx" : "csv");
    if (s.kind) v += "," + std::string(to_string(*s.kind));
    out.emplace_back("track_source", v);
  }
  out.emplace_back("walk_run_max_speed_kmh", csv::format_double(cleaning.walk_run_max_speed_kmh));
  out.emplace_back("cycle_max_speed_kmh", csv::format_double(cleaning.cycle_max_speed_kmh));
  out.emplace_back("max_gap_m", csv::format_double(cleaning.max_gap_m));
  out.emplace_back("sigma", csv::format_double(matcher.sigma_m));
  out.emplace_back("candidate_radius", csv::format_double(matcher.candidate_radius_m));
  out.emplace_back("transition_same", csv::format_double(matcher.transition_same));
  out.emplace_back("transition_adjacent", csv::format_double(matcher.transition_adjacent));
  out.emplace_back("transition_other", csv::format_double(matcher.transition_other));
  std::string bounds;
  for (std::size_t i = 1; i < 5; ++i) {
    if (i > 1) bounds += ",";
    bounds += csv::format_double(periods.bounds_s[i] / 3600.0);
  }
  out.emplace_back("period_bounds", bounds);
  out.emplace_back("classes", std::to_string(classes));
  out.emplace_back("out", out_dir.string());
  out.emplace_back("workers", std::to_string(workers));
  return out;
}

void RunReport::check_consistency() const {
  std::size_t rejected_total = 0;
  for (const auto& [reason, n] : rejected) rejected_total += n;
  if (accepted + rejected_total != parsed_tracks) {
    throw InvariantError("accepted + rejected != parsed (" + std::to_string(accepted) + " + " +
                         std::to_string(rejected_total) + " != " + std::to_string(parsed_tracks) + ")");
  }
  std::size_t in_periods = 0;
  for (const auto& [p, n] : per_period) in_periods += n;
  if (in_periods + crossing != accepted) {
    throw InvariantError("per-period + crossing != accepted");
  }
  if (matched_tracks + unmatched_tracks != accepted) {
    throw InvariantError("matched + unmatched != accepted");
  }
}

std::string RunReport::to_text() const {
  std::ostringstream o;
  o << "[counts]\n";
  o << "parsed_tracks: " << parsed_tracks << '\n';
  o << "parse_rejected_records: " << parse_rejected_records << '\n';
  for (const auto& [reason, n] : rejected) o << "rejected_" << reason << ": " << n << '\n';
  o << "accepted: " << accepted << '\n';
  for (const auto& [p, n] : per_period) o << "period_" << p << ": " << n << '\n';
  o << "crossing: " << crossing << '\n';
  o << "matched_tracks: " << matched_tracks << '\n';
  o << "unmatched_tracks: " << unmatched_tracks << '\n';
  o << "assigned_points: " << assigned_points << '\n';
  o << "skipped_points: " << skipped_points << '\n';
  o << "breaks_total: " << breaks_total << '\n';
  o << "score_records: " << score_records << '\n';
  o << "\n[timing_seconds]\n";
  for (const auto& [stage, s] : stage_seconds) o << stage << ": " << csv::format_fixed(s, 3) << '\n';
  o << "\n[config]\n";
  for (const auto& [k, v] : config) o << k << ": " << v << '\n';
  return o.str();
}

std::string RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["parsed_tracks"] = parsed_tracks;
  j["parse_rejected_records"] = parse_rejected_records;
  j["rejected"] = rejected;
  j["accepted"] = accepted;
  j["per_period"] = per_period;
  j["crossing"] = crossing;
  j["matched_tracks"] = matched_tracks;
  j["unmatched_tracks"] = unmatched_tracks;
  j["assigned_points"] = assigned_points;
  j["skipped_points"] = skipped_points;
  j["breaks_total"] = breaks_total;
  j["score_records"] = score_records;
  auto& timing = j["stage_seconds"] = nlohmann::ordered_json::object();
  for (const auto& [stage, s] : stage_seconds) timing[stage] = s;
  auto& config_echo = j["config"] = nlohmann::ordered_json::array();
  for (const auto& [k, v] : config) config_echo.push_back({k, v});
  return j.dump(2) + "\n";
}

RoadNetwork load_configured_network(const PipelineConfig& cfg) {
  if (!cfg.network_geojson.empty()) return load_network_geojson(cfg.network_geojson);
  return load_network(cfg.vertices, cfg.segments);
}

RunReport run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  RunReport report;
  report.config = cfg.echo();
  StageTimer timer(report);

  const RoadNetwork net = load_configured_network(cfg);
  timer.lap("load_network");

  std::vector<Track> tracks;
  for (const auto& src : cfg.sources) {
    auto parsed = parse_tracks(src.path, src.format, {src.kind, src.manifest});
    report.parse_rejected_records += parsed.rejected_records;
    for (auto& t : parsed.tracks) tracks.push_back(std::move(t));
  }
  report.parsed_tracks = tracks.size();
  timer.lap("parse");

  for (auto r : kRejectReasons) report.rejected[std::string(to_string(r))] = 0;
  for (auto p : kDayPeriods) report.per_period[std::string(to_string(p))] = 0;
  std::vector<Track> accepted;
  std::vector<Period> periods;
  std::vector<PeriodRecord> period_records;
  for (auto& t : tracks) {
    const auto res = clean(t, cfg.cleaning);
    if (!res.accepted()) {
      ++report.rejected[std::string(to_string(res.reason))];
      continue;
    }
    const Period p = assign_period(t, cfg.periods);
    if (p == Period::crossing) {
      ++report.crossing;
    } else {
      ++report.per_period[std::string(to_string(p))];
    }
    periods.push_back(p);
    period_records.push_back({t.kind, p});
    accepted.push_back(std::move(t));
  }
  report.accepted = accepted.size();
  timer.lap("clean");

  auto matched = match_tracks_parallel(accepted, net, cfg.matcher, cfg.workers);
  timer.lap("match");

  std::vector<MatchedActivity> activities;
  std::vector<ActivityUsage> usage;
  activities.reserve(accepted.size());
  usage.reserve(accepted.size());
  for (std::size_t i = 0; i < accepted.size(); ++i) {
    const auto& m = matched[i];
    if (m.assignments.empty()) {
      ++report.unmatched_tracks;
    } else {
      ++report.matched_tracks;
    }
    report.assigned_points += m.assignments.size();
    report.skipped_points += accepted[i].points.size() - m.assignments.size();
    report.breaks_total += m.break_count;
    activities.push_back({std::move(matched[i]), accepted[i].user_id, accepted[i].kind, periods[i]});
    usage.push_back(to_usage(net, activities.back()));
  }
  const UsageTables tables = accumulate_parallel(usage, cfg.workers);
  timer.lap("accumulate");

  const auto scores = evaluate(tables);
  report.score_records = scores.size();
  timer.lap("score");

  std::vector<std::pair<std::string, std::string>> files;
  for (auto kind : kActivityKinds) {
    for (auto scope : kScopes) {
      files.emplace_back(geojson_filename(kind, scope), export_geojson(net, scores, scope, kind, cfg.classes));
    }
  }
  {
    std::ostringstream o;
    write_scores_csv(scores, o);
    files.emplace_back("scores.csv", o.str());
  }
  for (auto kind : kActivityKinds) {
    std::ostringstream o;
    write_histogram_csv(hourly_histogram(accepted, kind), o);
    files.emplace_back("histogram_" + std::string(to_string(kind)) + ".csv", o.str());
  }
  {
    std::ostringstream o;
    write_period_summary_csv(period_summary(period_records), o);
    files.emplace_back("period_summary.csv", o.str());
  }
  if (cfg.dump_matched) {
    std::ostringstream o;
    write_matched_csv(net, activities, o);
    files.emplace_back("matched.csv", o.str());
  }
  timer.lap("classify_export");

  report.check_consistency();

  std::filesystem::create_directories(cfg.out_dir);
  for (const auto& [name, text] : files) write_text_file(cfg.out_dir / name, text);
  timer.lap("write");
  write_text_file(cfg.out_dir / "run_report.txt", report.to_text());
  write_text_file(cfg.out_dir / "run_report.json", report.to_json());
  spdlog::info("wrote {} files to {}", files.size() + 2, cfg.out_dir.string());
  return report;
}

}  // namespace roadpop
