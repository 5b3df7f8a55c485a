#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roadpop/tracks.hpp"

namespace roadpop {

enum class TrackFormat { csv, gpx };

std::optional<TrackFormat> parse_track_format(std::string_view s);

struct TrackSourceOptions {
  /// Used for GPX tracks whose metadata does not carry a kind.
  std::optional<ActivityKind> default_kind;
  /// Optional `track_id,user_id,kind` sidecar for GPX files.
  std::optional<std::filesystem::path> manifest;
};

struct ParseOutcome {
  std::vector<Track> tracks;
  std::size_t rejected_records = 0;  // malformed rows / points / tracks skipped
};

/// CSV: `track_id,user_id,kind,timestamp_iso8601,lat,lon`, one row per point,
/// header required, rows of a track contiguous. GPX 1.1: one activity per
/// <trk>, user and kind from <extensions> (`user_id`, `kind`), <type>, or the
/// manifest. Malformed records are skipped with a warning; unreadable files or
/// syntax errors throw InputError.
ParseOutcome parse_tracks(const std::filesystem::path& source, TrackFormat format,
                          const TrackSourceOptions& options = {});

ParseOutcome parse_tracks_csv(std::istream& in, const std::string& name);

void write_tracks_csv(std::span<const Track> tracks, const std::filesystem::path& path);
void write_tracks_csv(std::span<const Track> tracks, std::ostream& out);

}  // namespace roadpop
