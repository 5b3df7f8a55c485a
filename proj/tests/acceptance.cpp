// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "roadpop/batch.hpp"
#include "roadpop/classify.hpp"
#include "roadpop/export.hpp"
#include "roadpop/map_matching.hpp"
#include "roadpop/pipeline.hpp"
#include "roadpop/popularity.hpp"
#include "roadpop/synth.hpp"
#include "roadpop/viterbi.hpp"
#include "support.hpp"

using namespace roadpop;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

// 1 ------------------------------------------------------------------------
Outcome p_index_oracle() {
  std::mt19937_64 rng(1001);
  const auto t0 = Clock::now();
  std::size_t mismatches = 0;
  for (int n = 0; n < 10000; ++n) {
    std::vector<std::int64_t> v(rng() % 51);
    for (auto& x : v) x = 1 + std::int64_t(rng() % 100);
    if (p_index(v) != oracle::p_index(v)) ++mismatches;
  }
  const double s = seconds_since(t0);
  return {mismatches == 0 && s < 5.0, fmt("10000 multisets, %zu mismatches, %.3f s (limit 5 s)", mismatches, s)};
}

// 2 ------------------------------------------------------------------------
Outcome p_index_anchor() {
  int bad = 0;
  for (std::int64_t h = 1; h <= 20; ++h) {
    UsageTables full, short_by_one;
    for (std::int64_t u = 0; u < h; ++u) {
      for (std::int64_t i = 0; i < h; ++i) {
        full.add({"u" + std::to_string(u), ActivityKind::walk_run, Period::p3, {"s"}});
        if (i + 1 < h) short_by_one.add({"u" + std::to_string(u), ActivityKind::walk_run, Period::p3, {"s"}});
      }
    }
    const auto a = evaluate(full.table(Scope::global, ActivityKind::walk_run));
    if (a.size() != 1 || a[0].p_index != h) ++bad;
    const auto b = evaluate(short_by_one.table(Scope::global, ActivityKind::walk_run));
    // h = 1: nobody used the segment, so it scores 0 by being absent
    const std::int64_t pb = b.empty() ? 0 : b[0].p_index;
    if (pb != h - 1) ++bad;
    if (p_index(std::vector<std::int64_t>(std::size_t(h), h)) != h) ++bad;
    if (h > 1 && p_index(std::vector<std::int64_t>(std::size_t(h), h - 1)) != h - 1) ++bad;
  }
  return {bad == 0, fmt("h = 1..20, %d wrong", bad)};
}

// 3 ------------------------------------------------------------------------
Track track_through(const std::vector<LatLon>& pts) {
  Track t{"t", "u", ActivityKind::walk_run, {}};
  for (std::size_t i = 0; i < pts.size(); ++i)
    t.points.push_back(support::point(pts[i], 86400 + 8 * 3600 + 10 * std::int64_t(i)));
  return t;
}

Outcome viterbi_exactness() {
  const double probs[3] = {1.0, 0.2, 0.0};
  std::mt19937_64 rng(3003);
  const auto t0 = Clock::now();
  std::size_t suboptimal = 0, layout = 0, decoded_points = 0, breaks = 0;

  // matcher end to end on random networks
  for (int n = 0; n < 500; ++n) {
    MatcherConfig cfg;
    cfg.transition_same = probs[rng() % 3];
    cfg.transition_adjacent = probs[rng() % 3];
    cfg.transition_other = probs[rng() % 3];
    cfg.candidate_radius_m = 50 + double(rng() % 50);
    std::uniform_real_distribution<double> u(0, 400);
    for (;;) {
      const auto net = support::random_network(rng, 6 + rng() % 5, 6 + rng() % 7, 400);
      std::vector<LatLon> pts;
      const std::size_t k = 2 + rng() % 7;
      for (std::size_t i = 0; i < k; ++i) pts.push_back(offset_m(support::kOrigin, u(rng), u(rng)));
      bool small = true;
      std::size_t decodable = 0;
      for (const auto& p : pts) {
        const auto c = oracle::candidates_linear(net, p, cfg.candidate_radius_m);
        small = small && c.size() <= 5;
        decodable += c.empty() ? 0 : 1;
      }
      if (!small || decodable < 2) continue;
      const auto t = track_through(pts);
      const auto m = match_track(t, net, cfg);
      const auto check = oracle::check_match(t, net, cfg, m);
      decoded_points += m.assignments.size();
      breaks += m.break_count;
      if (!check.layout_ok) {
        ++layout;
      } else if (!(std::abs(check.achieved - check.optimum) <= 1e-9 * std::max(1.0, std::abs(check.optimum))) ||
                 m.break_count + 1 != check.chains) {
        ++suboptimal;
      }
      break;
    }
  }

  // the kernel alone on arbitrary transition tables
  std::size_t kernel_bad = 0;
  std::uniform_real_distribution<double> dist(0, 60);
  for (int n = 0; n < 500; ++n) {
    const std::size_t segs = 3 + rng() % 6;
    std::vector<std::vector<double>> table(segs, std::vector<double>(segs));
    for (auto& row : table)
      for (auto& x : row) {
        const double p = probs[rng() % 3];
        x = p > 0 ? std::log(p) : kNegInf;
      }
    const auto tr = [&](std::uint32_t a, std::uint32_t b) { return table[a][b]; };
    std::vector<oracle::Layer> layers(1 + rng() % 8);
    std::vector<HmmState> states;
    std::vector<std::size_t> offsets{0};
    for (auto& l : layers) {
      std::vector<std::uint32_t> pool(segs);
      for (std::size_t s = 0; s < segs; ++s) pool[s] = std::uint32_t(s);
      std::shuffle(pool.begin(), pool.end(), rng);
      const std::size_t k = 1 + rng() % std::min<std::size_t>(5, segs);
      for (std::size_t j = 0; j < k; ++j) {
        const double e = emission_logweight(dist(rng), 15.0);
        l.segment.push_back(pool[j]);
        l.emission.push_back(e);
        states.push_back({pool[j], e});
      }
      offsets.push_back(states.size());
    }
    const auto path = viterbi_decode(std::span<const HmmState>(states), std::span<const std::size_t>(offsets), tr);
    const std::function<double(std::uint32_t, std::uint32_t)> f = tr;
    const auto starts = oracle::chain_starts(layers, f);
    const double best = oracle::viterbi_optimum(layers, f);
    const double got = oracle::sequence_weight(layers, path.choice, starts, f);
    if (!(std::abs(got - best) <= 1e-9 * std::max(1.0, std::abs(best))) || path.break_count + 1 != starts.size())
      ++kernel_bad;
  }

  const double s = seconds_since(t0);
  return {suboptimal == 0 && layout == 0 && kernel_bad == 0 && s < 30.0,
          fmt("500 matcher instances (%zu points, %zu breaks): %zu suboptimal, %zu layout errors; "
              "500 kernel instances: %zu suboptimal; %.2f s (limit 30 s)",
              decoded_points, breaks, suboptimal, layout, kernel_bad, s)};
}

// 4 ------------------------------------------------------------------------
Outcome cleaning_thresholds() {
  const CleaningConfig rules;
  int bad = 0;
  std::ostringstream log;
  const auto expect = [&](const char* what, const TrackMetrics& m, ActivityKind k, bool accepted) {
    const auto r = clean(m, k, rules);
    if (r.accepted() != accepted) {
      ++bad;
      log << " " << what;
    }
  };
  const auto metrics = [](double distance_m, double elapsed_s, double gap_m) {
    TrackMetrics m;
    m.point_count = 10;
    m.distance_m = distance_m;
    m.elapsed_s = elapsed_s;
    m.max_gap_m = gap_m;
    return m;
  };
  // speeds are distance / elapsed * 3.6; these hit the literals exactly
  const auto w_lo = metrics(24999, 3600, 10), w_hi = metrics(25000, 3600, 10);
  const auto c_lo = metrics(34999, 3600, 10), c_hi = metrics(35000, 3600, 10);
  if (w_hi.average_speed_kmh() != 25.0 || c_hi.average_speed_kmh() != 35.0 || c_lo.average_speed_kmh() != 34.999 ||
      std::abs(w_lo.average_speed_kmh() - 24.999) > 1e-12) {
    ++bad;
    log << " speed-construction";
  }
  expect("walk@24.999", w_lo, ActivityKind::walk_run, true);
  expect("walk@25.0", w_hi, ActivityKind::walk_run, false);
  expect("cycle@34.999", c_lo, ActivityKind::cycle, true);
  expect("cycle@35.0", c_hi, ActivityKind::cycle, false);
  expect("gap@999.9", metrics(100, 3600, 999.9), ActivityKind::walk_run, true);
  expect("gap@1000.0", metrics(100, 3600, 1000.0), ActivityKind::walk_run, false);
  expect("cycle-gap@1000.0", metrics(100, 3600, 1000.0), ActivityKind::cycle, false);

  // whole tracks: two points 999.9 m / 1000.0 m apart over an hour
  for (double gap : {999.9, 1000.0}) {
    Track t{"g", "u", ActivityKind::walk_run, {support::point(support::kOrigin, 86400 + 8 * 3600)}};
    t.points.push_back(support::point(offset_m(support::kOrigin, gap, 0), 86400 + 9 * 3600));
    const auto m = measure(t);
    const bool want = m.max_gap_m < 1000.0;
    if (clean(t, rules).accepted() != want) {
      ++bad;
      log << " track-gap@" << gap;
    }
  }
  return {bad == 0, fmt("7 boundary cases + 2 tracks, %d wrong%s", bad, log.str().c_str())};
}

// 5 ------------------------------------------------------------------------
Period expected_period(std::int64_t local_s) {
  const std::int64_t h = ((local_s % 86400) + 86400) % 86400 / 3600;
  if (h < 6) return Period::p1;
  if (h < 10) return Period::p2;
  if (h < 16) return Period::p3;
  if (h < 20) return Period::p4;
  return Period::p5;
}

Outcome period_partition() {
  std::mt19937_64 rng(5005);
  const PeriodScheme scheme;
  std::size_t wrong = 0;
  for (int n = 0; n < 10000; ++n) {
    const std::int64_t utc_s = std::int64_t(rng() % (200ull * 365 * 86400)) - 100ll * 365 * 86400;
    const std::int32_t offset = std::int32_t(rng() % (27 * 60)) - 12 * 60;
    Track t{"t", "u", ActivityKind::walk_run, {}};
    TrackPoint p;
    p.time = {utc_s * 1000 + std::int64_t(rng() % 1000), offset};
    t.points.push_back(p);
    const Period got = assign_period(t, scheme);
    int hits = 0;
    for (auto q : kDayPeriods) hits += got == q ? 1 : 0;
    if (hits != 1 || got != expected_period(utc_s + offset * 60)) ++wrong;
  }

  // 05:50 -> 06:10 along one segment
  const LatLon a = support::kOrigin, b = offset_m(a, 0, 600);
  const auto net = RoadNetwork::build({{"a", a}, {"b", b}}, {{"s", "a", "b", {}}});
  Track x{"x", "u", ActivityKind::walk_run, {}};
  for (int i = 0; i <= 20; ++i) x.points.push_back(support::point(offset_m(a, 0, 25.0 * i), 86400 + 5 * 3600 + 50 * 60 + 60 * i));
  const Period px = assign_period(x, scheme);
  const MatchedActivity ma{match_track(x, net, MatcherConfig{}), x.user_id, x.kind, px};
  const std::vector<ActivityUsage> usage{to_usage(net, ma)};
  const auto scores = evaluate(accumulate_parallel(usage, 2));
  bool in_global = false, in_period = false;
  for (const auto& s : scores) (s.scope == Scope::global ? in_global : in_period) = true;
  const bool ok = wrong == 0 && px == Period::crossing && in_global && !in_period;
  return {ok, fmt("10000 timestamps, %zu wrong; 05:50-06:10 track is %s, global=%s, per-period=%s", wrong,
                  std::string(to_string(px)).c_str(), in_global ? "yes" : "no", in_period ? "yes" : "no")};
}

// 6 ------------------------------------------------------------------------
Outcome matching_accuracy() {
  const auto net = make_grid_network({.rows = 6, .cols = 10, .spacing_m = 200.0, .origin = support::kOrigin, .max_segments = 100});
  double shortest = 1e300;
  for (std::size_t i = 0; i < net.segment_count(); ++i) shortest = std::min(shortest, net.segment(SegmentIndex(i)).length_m);
  SynthParams params;
  params.users = 20;
  params.activities = 10;
  params.noise_m = 15.0;
  params.spacing_m = 10.0;
  params.points_per_track = 100;
  params.seed = 6006;
  const auto data = synthesize(net, params);

  const auto t0 = Clock::now();
  const auto matched = match_tracks_serial(data.tracks, net, MatcherConfig{});
  const double s = seconds_since(t0);

  std::size_t assigned = 0, correct = 0, exact = 0;
  for (std::size_t i = 0; i < matched.size(); ++i) {
    const auto& truth = data.truth[i];
    for (const auto& a : matched[i].assignments) {
      ++assigned;
      correct += a.segment == truth.point_segments[a.point_index] ? 1 : 0;
    }
    exact += matched[i].traversed == truth.traversed ? 1 : 0;
  }
  const double point_rate = assigned ? double(correct) / double(assigned) : 0.0;
  const double track_rate = double(exact) / double(matched.size());
  const bool ok = net.segment_count() == 100 && shortest >= 150.0 && matched.size() == 200 && point_rate >= 0.95 &&
                  track_rate >= 0.90 && s < 60.0;
  return {ok, fmt("%zu segments (shortest %.1f m), %zu tracks: points %.2f%% (need 95%%), exact traversals %.2f%% "
                  "(need 90%%), %.2f s single-threaded (limit 60 s)",
                  net.segment_count(), shortest, matched.size(), 100 * point_rate, 100 * track_rate, s)};
}

// 7 ------------------------------------------------------------------------
Outcome event_burst() {
  UsageTables solo, club;
  for (int i = 0; i < 1000; ++i) solo.add({"fan", ActivityKind::cycle, Period::p4, {"s"}});
  for (int u = 0; u < 10; ++u)
    for (int i = 0; i < 10; ++i) club.add({"u" + std::to_string(u), ActivityKind::cycle, Period::p4, {"s"}});
  const auto a = evaluate(solo.table(Scope::global, ActivityKind::cycle));
  const auto b = evaluate(club.table(Scope::global, ActivityKind::cycle));
  const std::int64_t pa = a.empty() ? -1 : a[0].p_index, pb = b.empty() ? -1 : b[0].p_index;
  return {pa == 1 && pb == 10, fmt("1 x 1000 -> %lld, 10 x 10 -> %lld", (long long)pa, (long long)pb)};
}

// 8 ------------------------------------------------------------------------
Outcome jenks_optimality() {
  std::mt19937_64 rng(8008);
  const auto t0 = Clock::now();
  std::size_t mismatches = 0;
  for (int n = 0; n < 1000; ++n) {
    std::vector<std::int64_t> iv(1 + rng() % 12);
    for (auto& x : iv) x = std::int64_t(rng() % 50);
    const std::vector<double> dv(iv.begin(), iv.end());
    const std::size_t k = 1 + rng() % std::min<std::size_t>(4, distinct_count(dv));
    const auto b = jenks_breaks(dv, k);
    std::vector<std::vector<std::int64_t>> classes(k);
    for (auto v : iv) classes.at(b.class_of(double(v))).push_back(v);
    if (oracle::scaled_cost(classes) != oracle::jenks_optimum(iv, k)) ++mismatches;
  }
  const double s = seconds_since(t0);
  return {mismatches == 0 && s < 10.0, fmt("1000 sets, %zu cost mismatches, %.3f s (limit 10 s)", mismatches, s)};
}

// 9 ------------------------------------------------------------------------
Outcome determinism() {
  const auto root = support::temp_dir("acceptance_determinism");
  std::vector<std::string> names{"scores.csv", "histogram_walk_run.csv", "histogram_cycle.csv", "period_summary.csv"};
  for (auto k : kActivityKinds)
    for (auto s : kScopes) names.push_back(geojson_filename(k, s));
  std::vector<std::vector<std::string>> outputs;
  std::size_t records = 0;
  for (int w : {1, 4, 8}) {
    auto cfg = PipelineConfig::load(support::fixture("synth/pipeline.conf"));
    cfg.workers = w;
    cfg.out_dir = root / ("w" + std::to_string(w));
    records = run_pipeline(cfg).score_records;
    std::vector<std::string> files;
    for (const auto& n : names) files.push_back(support::slurp(cfg.out_dir / n));
    outputs.push_back(std::move(files));
  }
  std::size_t differing = 0;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (outputs[1][i] != outputs[0][i] || outputs[2][i] != outputs[0][i] || outputs[0][i].empty()) ++differing;
  return {differing == 0 && records > 0,
          fmt("workers 1/4/8, %zu files compared, %zu differ, %zu score records", names.size(), differing, records)};
}

// 10 -----------------------------------------------------------------------
Outcome throughput() {
  const auto net = make_grid_network({.rows = 51, .cols = 51, .spacing_m = 150.0, .origin = support::kOrigin, .max_segments = 5000});
  SynthParams params;
  params.users = 100;
  params.activities = 100;
  params.points_per_track = 100;
  params.seed = 10010;
  const auto data = synthesize(net, params);
  const int workers = default_workers();
  const auto t0 = Clock::now();
  const auto matched = match_tracks_parallel(data.tracks, net, MatcherConfig{}, workers);
  const double s = seconds_since(t0);
  std::size_t points = 0;
  for (const auto& m : matched) points += m.assignments.size();
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  const double peak_mb = double(ru.ru_maxrss) / 1024.0;
  const bool ok = net.segment_count() == 5000 && matched.size() == 10000 && s < 120.0 && peak_mb < 2048.0;
  return {ok, fmt("%zu tracks x %zu points on %zu segments, %zu points assigned, %.2f s with %d worker(s) "
                  "(limit 120 s), peak RSS %.0f MB (limit 2048 MB)",
                  matched.size(), params.points_per_track, net.segment_count(), points, s, workers, peak_mb)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"p-index matches brute force", p_index_oracle},
      {"p-index anchor h users x h", p_index_anchor},
      {"Viterbi decodes are optimal", viterbi_exactness},
      {"cleaning thresholds are strict", cleaning_thresholds},
      {"periods partition the day", period_partition},
      {"synthetic matching accuracy", matching_accuracy},
      {"event burst", event_burst},
      {"Jenks breaks are optimal", jenks_optimality},
      {"parallel runs are byte-identical", determinism},
      {"throughput and memory", throughput},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
