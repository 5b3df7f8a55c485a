#include "roadpop/tracks.hpp"

#include <fstream>
#include <stdexcept>

#include "roadpop/csv.hpp"
#include "roadpop/error.hpp"

namespace roadpop {

std::string_view to_string(ActivityKind k) {
  return k == ActivityKind::cycle ? "cycle" : "walk_run";
}

std::optional<ActivityKind> parse_activity_kind(std::string_view s) {
  s = csv::trim(s);
  if (s == "walk_run" || s == "walk" || s == "run" || s == "walking" || s == "running" ||
      s == "hiking") {
    return ActivityKind::walk_run;
  }
  if (s == "cycle" || s == "cycling" || s == "bike" || s == "biking" || s == "ride") {
    return ActivityKind::cycle;
  }
  return std::nullopt;
}

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::none: return "none";
    case RejectReason::overspeed: return "overspeed";
    case RejectReason::gap_too_long: return "gap_too_long";
    case RejectReason::too_few_points: return "too_few_points";
    case RejectReason::non_monotonic_time: return "non_monotonic_time";
  }
  return "?";
}

bool CleaningConfig::set(std::string_view key, double value) {
  if (key == "walk_run_max_speed_kmh") {
    walk_run_max_speed_kmh = value;
  } else if (key == "cycle_max_speed_kmh") {
    cycle_max_speed_kmh = value;
  } else if (key == "max_gap_m") {
    max_gap_m = value;
  } else {
    return false;
  }
  return true;
}

CleaningConfig CleaningConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open cleaning config '" + path.string() + "'");
  CleaningConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = csv::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const auto value = eq == std::string_view::npos ? std::nullopt : csv::parse_double(body.substr(eq + 1));
    if (!value || !cfg.set(csv::trim(body.substr(0, eq)), *value)) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": bad cleaning entry '" +
                       std::string(body) + "'");
    }
  }
  return cfg;
}

TrackMetrics measure(const Track& t) {
  TrackMetrics m;
  m.point_count = t.points.size();
  for (std::size_t i = 1; i < t.points.size(); ++i) {
    const auto& a = t.points[i - 1];
    const auto& b = t.points[i];
    if (b.time.utc_ms < a.time.utc_ms) m.monotonic = false;
    const double d = geodesic_m(a.position, b.position);
    m.distance_m += d;
    if (d > m.max_gap_m) m.max_gap_m = d;
  }
  if (t.points.size() >= 2) {
    m.elapsed_s = static_cast<double>(t.points.back().time.utc_ms - t.points.front().time.utc_ms) / 1000.0;
  }
  return m;
}

double average_speed_kmh(const Track& t) {
  const auto m = measure(t);
  if (!(m.elapsed_s > 0.0)) throw std::domain_error("track '" + t.track_id + "' has no elapsed time");
  return m.average_speed_kmh();
}

double max_gap_m(const Track& t) { return measure(t).max_gap_m; }

CleanResult clean(const TrackMetrics& m, ActivityKind kind, const CleaningConfig& rules) {
  const auto reject = [](RejectReason r) { return CleanResult{CleanStatus::rejected, r}; };
  if (m.point_count < 2) return reject(RejectReason::too_few_points);
  if (!m.monotonic || !(m.elapsed_s > 0.0)) return reject(RejectReason::non_monotonic_time);
  if (m.average_speed_kmh() >= rules.max_speed_kmh(kind)) return reject(RejectReason::overspeed);
  if (m.max_gap_m >= rules.max_gap_m) return reject(RejectReason::gap_too_long);
  return {};
}

CleanResult clean(const Track& t, const CleaningConfig& rules) { return clean(measure(t), t.kind, rules); }

std::string_view to_string(Period p) {
  switch (p) {
    case Period::p1: return "P1";
    case Period::p2: return "P2";
    case Period::p3: return "P3";
    case Period::p4: return "P4";
    case Period::p5: return "P5";
    case Period::crossing: return "crossing";
  }
  return "?";
}

std::optional<Period> parse_period(std::string_view s) {
  for (auto p : {Period::p1, Period::p2, Period::p3, Period::p4, Period::p5, Period::crossing}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

PeriodScheme PeriodScheme::from_hours(const std::array<double, 4>& interior) {
  PeriodScheme s;
  double prev = 0.0;
  for (std::size_t i = 0; i < interior.size(); ++i) {
    if (!(interior[i] > prev) || !(interior[i] < 24.0)) {
      throw InputError("period boundaries must satisfy 0 < h1 < h2 < h3 < h4 < 24");
    }
    prev = interior[i];
    s.bounds_s[i + 1] = interior[i] * 3600.0;
  }
  return s;
}

Period PeriodScheme::period_of(double sod) const {
  for (std::size_t i = 0; i < 5; ++i) {
    if (sod >= bounds_s[i] && sod < bounds_s[i + 1]) return kDayPeriods[i];
  }
  return Period::p5;  // unreachable for sod in [0, 86400)
}

Period assign_period(const Track& t, const PeriodScheme& scheme) {
  if (t.points.empty()) return Period::crossing;
  const Period first = scheme.period_of(t.points.front().time.local_seconds_of_day());
  for (const auto& pt : t.points) {
    if (scheme.period_of(pt.time.local_seconds_of_day()) != first) return Period::crossing;
  }
  return first;
}

}  // namespace roadpop
