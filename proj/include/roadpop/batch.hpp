#pragma once

#include <span>
#include <vector>

#include "roadpop/map_matching.hpp"
#include "roadpop/popularity.hpp"

namespace roadpop {

/// Threads available to OpenMP (at least 1).
int default_workers();

/// Reference implementation: matches tracks one after another.
std::vector<MatchedTrack> match_tracks_serial(std::span<const Track> tracks, const RoadNetwork& net,
                                              const MatcherConfig& cfg);

/// OpenMP version. Results are written to per-track slots, so the output is
/// identical to match_tracks_serial for any worker count.
std::vector<MatchedTrack> match_tracks_parallel(std::span<const Track> tracks, const RoadNetwork& net,
                                                const MatcherConfig& cfg, int workers);

/// Reference implementation: one table set filled in input order.
UsageTables accumulate_serial(std::span<const ActivityUsage> activities);

/// Each worker fills a partial table set over a contiguous chunk; partials
/// are merged in chunk order. Equal to accumulate_serial by associativity
/// and commutativity of the pointwise sum.
UsageTables accumulate_parallel(std::span<const ActivityUsage> activities, int workers);

}  // namespace roadpop
