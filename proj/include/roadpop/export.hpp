#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roadpop/classify.hpp"
#include "roadpop/map_matching.hpp"
#include "roadpop/popularity.hpp"
#include "roadpop/road_network.hpp"
#include "roadpop/tracks.hpp"

namespace roadpop {

inline constexpr std::size_t kDefaultClasses = 5;

/// `popularity_<kind>_<scope>.geojson`
std::string geojson_filename(ActivityKind kind, Scope scope);

/// One LineString feature per network segment (lon,lat order) with
/// `segment_id, p_index, class, user_count, activity_count`; segments without
/// a score get zeros. Natural-breaks classes are computed over all segments'
/// p-index values, with k reduced to the number of distinct values when
/// needed; the breaks go into the collection's top-level members. Output is
/// byte-stable for identical inputs.
std::string export_geojson(const RoadNetwork& net, std::span<const PopularityScore> scores, Scope scope,
                           ActivityKind kind, std::size_t k = kDefaultClasses);
/// Name-based form; throws std::invalid_argument for an unknown scope or kind.
std::string export_geojson(const RoadNetwork& net, std::span<const PopularityScore> scores,
                           std::string_view scope, std::string_view kind,
                           std::size_t k = kDefaultClasses);

struct HourHistogram {
  ActivityKind kind = ActivityKind::walk_run;
  std::array<std::int64_t, 24> bins{};

  std::int64_t total() const;
};

/// Bins each track of `kind` by the local hour of its first point.
HourHistogram hourly_histogram(std::span<const Track> tracks, ActivityKind kind);

struct PeriodRecord {
  ActivityKind kind = ActivityKind::walk_run;
  Period period = Period::crossing;
};

/// Non-crossing activity counts per (period, kind). `total` sums the five
/// periods; crossing activities are counted separately and left out of it.
struct PeriodSummary {
  std::array<std::array<std::int64_t, 2>, 5> counts{};
  std::array<std::int64_t, 2> total{};
  std::array<std::int64_t, 2> crossing{};

  std::int64_t count(Period p, ActivityKind k) const;
};

PeriodSummary period_summary(std::span<const PeriodRecord> records);

void write_histogram_csv(const HourHistogram& h, std::ostream& out);
void write_period_summary_csv(const PeriodSummary& s, std::ostream& out);

/// `segment_id,kind,scope,p_index,user_count,activity_count`; rows are written
/// in the order given (evaluate() already sorts them).
void write_scores_csv(std::span<const PopularityScore> scores, std::ostream& out);
std::vector<PopularityScore> read_scores_csv(const std::filesystem::path& path);

/// A matched track plus what the aggregation needs to know about it.
struct MatchedActivity {
  MatchedTrack matched;
  std::string user_id;
  ActivityKind kind = ActivityKind::walk_run;
  Period period = Period::crossing;
};

/// Debug dump: `track_id,point_index,segment_id,distance_m` rows, each track
/// followed by `#track,<track_id>,<user_id>,<kind>,<period>,<break_count>,<traversed ids ';'-joined>`.
void write_matched_csv(const RoadNetwork& net, std::span<const MatchedActivity> matched, std::ostream& out);
/// Reads the `#track` summary lines back as aggregation input.
std::vector<ActivityUsage> read_matched_summaries(const std::filesystem::path& path);

ActivityUsage to_usage(const RoadNetwork& net, const MatchedActivity& m);

/// Writes `text` to `path` atomically enough for our purposes (temp + rename).
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace roadpop
