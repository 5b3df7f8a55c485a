#include <doctest.h>

#include "roadpop/batch.hpp"
#include "roadpop/export.hpp"
#include "roadpop/synth.hpp"

using namespace roadpop;

namespace {

bool same(const MatchedTrack& a, const MatchedTrack& b) {
  if (a.track_id != b.track_id || a.traversed != b.traversed || a.break_count != b.break_count ||
      a.assignments.size() != b.assignments.size())
    return false;
  for (std::size_t i = 0; i < a.assignments.size(); ++i) {
    const auto& x = a.assignments[i];
    const auto& y = b.assignments[i];
    if (x.point_index != y.point_index || x.segment != y.segment || !(x.projected == y.projected) ||
        x.distance_m != y.distance_m)
      return false;
  }
  return true;
}

struct Data {
  RoadNetwork net;
  SynthOutput synth;
};

const Data& data() {
  static const Data d = [] {
    Data d;
    d.net = make_grid_network({.rows = 8, .cols = 8, .spacing_m = 180.0});
    SynthParams p;
    p.users = 12;
    p.activities = 10;
    p.points_per_track = 60;
    p.seed = 99;
    d.synth = synthesize(d.net, p);
    return d;
  }();
  return d;
}

}  // namespace

TEST_CASE("parallel matching equals the serial reference for any worker count") {
  const auto& d = data();
  const auto serial = match_tracks_serial(d.synth.tracks, d.net, MatcherConfig{});
  REQUIRE(serial.size() == d.synth.tracks.size());
  for (int workers : {1, 2, 3, 4, 8}) {
    const auto par = match_tracks_parallel(d.synth.tracks, d.net, MatcherConfig{}, workers);
    REQUIRE(par.size() == serial.size());
    for (std::size_t i = 0; i < par.size(); ++i) CHECK(same(par[i], serial[i]));
  }
}

TEST_CASE("parallel accumulation equals the serial reference") {
  const auto& d = data();
  const auto matched = match_tracks_serial(d.synth.tracks, d.net, MatcherConfig{});
  std::vector<ActivityUsage> usage;
  for (std::size_t i = 0; i < matched.size(); ++i) {
    const auto& t = d.synth.tracks[i];
    usage.push_back(to_usage(d.net, {matched[i], t.user_id, t.kind, assign_period(t, PeriodScheme{})}));
  }
  const auto serial = accumulate_serial(usage);
  CHECK(serial == accumulate(usage));
  for (int workers : {1, 2, 4, 7, 8, 64}) CHECK(accumulate_parallel(usage, workers) == serial);
  CHECK(accumulate_parallel({}, 4) == UsageTables{});
}

TEST_CASE("invalid inputs surface from the parallel path") {
  const auto& d = data();
  MatcherConfig bad;
  bad.sigma_m = -1;
  CHECK_THROWS_AS(match_tracks_parallel(d.synth.tracks, d.net, bad, 4), std::invalid_argument);
  CHECK(match_tracks_parallel({}, d.net, MatcherConfig{}, 4).empty());
  CHECK(default_workers() >= 1);
}
