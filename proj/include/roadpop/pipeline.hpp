#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "roadpop/export.hpp"
#include "roadpop/map_matching.hpp"
#include "roadpop/track_io.hpp"
#include "roadpop/tracks.hpp"

namespace roadpop {

struct TrackSource {
  std::filesystem::path path;
  TrackFormat format = TrackFormat::csv;
  std::optional<ActivityKind> kind;
  std::optional<std::filesystem::path> manifest;
};

/// Parses `path, format[, kind[, manifest]]`.
TrackSource parse_track_source(std::string_view spec, const std::filesystem::path& base_dir = {});

struct PipelineConfig {
  std::filesystem::path vertices;
  std::filesystem::path segments;
  std::filesystem::path network_geojson;
  std::vector<TrackSource> sources;
  CleaningConfig cleaning;
  MatcherConfig matcher;
  PeriodScheme periods;
  std::size_t classes = kDefaultClasses;
  std::filesystem::path out_dir = "out";
  int workers = 1;
  bool dump_matched = false;

  /// `key = value` lines, '#' comments, `track_source` repeatable. Relative
  /// paths resolve against the file's directory. Throws InputError.
  static PipelineConfig load(const std::filesystem::path& path);
  /// Applies one entry; throws InputError for unknown keys or bad values.
  void set(std::string_view key, std::string_view value, const std::filesystem::path& base_dir = {});

  /// Checks referenced paths exist and values are in range. Throws InputError.
  void validate() const;

  /// Key/value echo in a fixed order.
  std::vector<std::pair<std::string, std::string>> echo() const;
};

struct RunReport {
  std::size_t parsed_tracks = 0;
  std::size_t parse_rejected_records = 0;
  std::map<std::string, std::size_t> rejected;  // by reason name
  std::size_t accepted = 0;
  std::size_t crossing = 0;
  std::map<std::string, std::size_t> per_period;  // P1..P5
  std::size_t matched_tracks = 0;                 // at least one assigned point
  std::size_t unmatched_tracks = 0;
  std::size_t assigned_points = 0;
  std::size_t skipped_points = 0;
  std::size_t breaks_total = 0;
  std::size_t score_records = 0;
  std::vector<std::pair<std::string, double>> stage_seconds;
  std::vector<std::pair<std::string, std::string>> config;

  /// Throws InvariantError when the stage counts do not add up.
  void check_consistency() const;
  std::string to_text() const;
  std::string to_json() const;
};

/// load -> parse -> clean -> match -> accumulate -> score -> classify ->
/// export. Everything is read and computed before the output directory is
/// touched, so an input error leaves no partial outputs.
RunReport run_pipeline(const PipelineConfig& cfg);

/// Loads the network named by the config (CSV pair or GeoJSON).
RoadNetwork load_configured_network(const PipelineConfig& cfg);

}  // namespace roadpop
