#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "roadpop/geo.hpp"
#include "roadpop/timestamp.hpp"

namespace roadpop {

enum class ActivityKind { walk_run, cycle };
inline constexpr std::array<ActivityKind, 2> kActivityKinds{ActivityKind::walk_run, ActivityKind::cycle};

std::string_view to_string(ActivityKind k);
std::optional<ActivityKind> parse_activity_kind(std::string_view s);

struct TrackPoint {
  Timestamp time;
  LatLon position;
};

/// One user's one recorded activity.
struct Track {
  std::string track_id;
  std::string user_id;
  ActivityKind kind = ActivityKind::walk_run;
  std::vector<TrackPoint> points;
};

/// Thresholds for discarding implausible recordings. Both comparisons are
/// strict: a track is kept only when strictly below each limit.
struct CleaningConfig {
  double walk_run_max_speed_kmh = 25.0;
  double cycle_max_speed_kmh = 35.0;
  double max_gap_m = 1000.0;

  double max_speed_kmh(ActivityKind k) const {
    return k == ActivityKind::cycle ? cycle_max_speed_kmh : walk_run_max_speed_kmh;
  }
  /// Sets one `key=value` entry; returns false for an unknown key.
  bool set(std::string_view key, double value);
  /// Reads `key=value` lines ('#' starts a comment). Throws InputError.
  static CleaningConfig load(const std::filesystem::path& path);
};

enum class CleanStatus { accepted, rejected };
enum class RejectReason { none, overspeed, gap_too_long, too_few_points, non_monotonic_time };
inline constexpr std::array<RejectReason, 4> kRejectReasons{
    RejectReason::overspeed, RejectReason::gap_too_long, RejectReason::too_few_points,
    RejectReason::non_monotonic_time};

std::string_view to_string(RejectReason r);

struct CleanResult {
  CleanStatus status = CleanStatus::accepted;
  RejectReason reason = RejectReason::none;

  bool accepted() const { return status == CleanStatus::accepted; }
  friend bool operator==(const CleanResult&, const CleanResult&) = default;
};

/// Mean speed over the whole activity: summed great-circle distance between
/// consecutive points over (last - first) time. Throws std::domain_error when
/// the elapsed time is not positive.
double average_speed_kmh(const Track& t);

/// Largest great-circle distance between consecutive points; 0 for < 2 points.
double max_gap_m(const Track& t);

/// Everything the cleaning rules look at, computed in one pass.
struct TrackMetrics {
  std::size_t point_count = 0;
  bool monotonic = true;  // timestamps never decrease
  double elapsed_s = 0.0;
  double distance_m = 0.0;
  double max_gap_m = 0.0;

  double average_speed_kmh() const { return distance_m / elapsed_s * 3.6; }
};

TrackMetrics measure(const Track& t);

/// Applies the rules to precomputed metrics. First failing rule wins, in the
/// order too_few_points, non_monotonic_time, overspeed, gap_too_long.
CleanResult clean(const TrackMetrics& m, ActivityKind kind, const CleaningConfig& rules);
CleanResult clean(const Track& t, const CleaningConfig& rules);

enum class Period { p1, p2, p3, p4, p5, crossing };
inline constexpr std::array<Period, 5> kDayPeriods{Period::p1, Period::p2, Period::p3, Period::p4,
                                                   Period::p5};

std::string_view to_string(Period p);
std::optional<Period> parse_period(std::string_view s);

/// Five half-open local-time intervals [b0,b1) ... [b4,b5) partitioning the day.
struct PeriodScheme {
  std::array<double, 6> bounds_s{0.0, 6 * 3600.0, 10 * 3600.0, 16 * 3600.0, 20 * 3600.0, 24 * 3600.0};

  /// Builds from the four interior boundaries in hours. Throws InputError
  /// unless 0 < h1 < h2 < h3 < h4 < 24.
  static PeriodScheme from_hours(const std::array<double, 4>& interior);

  Period period_of(double local_seconds_of_day) const;
};

/// The period holding every point's local time, or crossing.
Period assign_period(const Track& t, const PeriodScheme& scheme);

}  // namespace roadpop
