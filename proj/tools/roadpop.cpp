// roadpop: per-segment walkability / bikeability from activity GPS tracks.
//
// Subcommands run the whole pipeline (`run`) or one stage at a time, with
// stage outputs on disk so they can be inspected and chained.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "roadpop/batch.hpp"
#include "roadpop/csv.hpp"
#include "roadpop/error.hpp"
#include "roadpop/export.hpp"
#include "roadpop/pipeline.hpp"
#include "roadpop/synth.hpp"
#include "roadpop/track_io.hpp"

namespace fs = std::filesystem;
using namespace roadpop;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitInvariant = 3;

struct NetworkArgs {
  std::string dir;
  std::string vertices;
  std::string segments;
  std::string geojson;

  void add_to(CLI::App& app) {
    app.add_option("--network", dir, "Directory holding vertices.csv and segments.csv");
    app.add_option("--vertices", vertices, "Vertex file (id,lat,lon)");
    app.add_option("--segments", segments, "Segment file (id,vertex_a,vertex_b,polyline)");
    app.add_option("--network-geojson", geojson, "GeoJSON FeatureCollection network");
  }

  RoadNetwork load() const {
    if (!geojson.empty()) return load_network_geojson(geojson);
    if (!dir.empty()) return load_network(fs::path(dir) / "vertices.csv", fs::path(dir) / "segments.csv");
    if (vertices.empty() || segments.empty()) {
      throw InputError("specify --network DIR, --vertices and --segments, or --network-geojson");
    }
    return load_network(vertices, segments);
  }
};

struct TrackArgs {
  std::string path;
  std::string format;
  std::string kind;
  std::string manifest;

  void add_to(CLI::App& app) {
    app.add_option("--tracks", path, "Track file")->required();
    app.add_option("--format", format, "csv or gpx (default: from extension)");
    app.add_option("--kind", kind, "Activity kind for GPX tracks without metadata");
    app.add_option("--manifest", manifest, "GPX sidecar manifest (track_id,user_id,kind)");
  }

  ParseOutcome parse() const {
    std::string fmt = format;
    if (fmt.empty()) fmt = fs::path(path).extension() == ".gpx" ? "gpx" : "csv";
    const auto f = parse_track_format(fmt);
    if (!f) throw InputError("unknown track format '" + fmt + "'");
    TrackSourceOptions opts;
    if (!kind.empty()) {
      opts.default_kind = parse_activity_kind(kind);
      if (!opts.default_kind) throw InputError("unknown kind '" + kind + "'");
    }
    if (!manifest.empty()) opts.manifest = manifest;
    return parse_tracks(path, *f, opts);
  }
};

/// Flags shared by subcommands that override PipelineConfig keys.
struct Overrides {
  std::optional<double> sigma, radius, t_same, t_adjacent, t_other;
  std::optional<double> walk_speed, cycle_speed, max_gap;
  std::string cleaning_config;
  std::string periods;

  void add_cleaning(CLI::App& app) {
    app.add_option("--cleaning-config", cleaning_config, "key=value cleaning thresholds file");
    app.add_option("--walk-run-max-speed", walk_speed, "km/h, default 25");
    app.add_option("--cycle-max-speed", cycle_speed, "km/h, default 35");
    app.add_option("--max-gap", max_gap, "meters, default 1000");
    app.add_option("--periods", periods, "Four interior period boundaries in hours, e.g. 6,10,16,20");
  }
  void add_matcher(CLI::App& app) {
    app.add_option("--sigma", sigma, "GPS noise std. dev. in meters, default 15");
    app.add_option("--candidate-radius", radius, "Candidate search radius in meters, default 60");
    app.add_option("--transition-same", t_same, "default 1.0");
    app.add_option("--transition-adjacent", t_adjacent, "default 0.2");
    app.add_option("--transition-other", t_other, "default 0.0");
  }

  void apply(PipelineConfig& cfg) const {
    if (!cleaning_config.empty()) cfg.set("cleaning_config", cleaning_config);
    if (!periods.empty()) cfg.set("period_bounds", periods);
    if (walk_speed) cfg.cleaning.walk_run_max_speed_kmh = *walk_speed;
    if (cycle_speed) cfg.cleaning.cycle_max_speed_kmh = *cycle_speed;
    if (max_gap) cfg.cleaning.max_gap_m = *max_gap;
    if (sigma) cfg.matcher.sigma_m = *sigma;
    if (radius) cfg.matcher.candidate_radius_m = *radius;
    if (t_same) cfg.matcher.transition_same = *t_same;
    if (t_adjacent) cfg.matcher.transition_adjacent = *t_adjacent;
    if (t_other) cfg.matcher.transition_other = *t_other;
  }
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_text_file(path, text);
}

template <class F>
std::string render(F&& f) {
  std::ostringstream o;
  f(o);
  return o.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"roadpop: road-segment popularity (walkability / bikeability) from activity GPS tracks"};
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  // run
  auto* run = app.add_subcommand("run", "Full pipeline from a config file");
  std::string run_config;
  NetworkArgs run_net;
  std::vector<std::string> run_sources;
  Overrides run_over;
  std::optional<std::size_t> run_classes;
  std::optional<int> run_workers;
  std::string run_out;
  bool run_dump = false;
  run->add_option("--config", run_config, "Pipeline config (key = value lines)");
  run_net.add_to(*run);
  run->add_option("--track-source", run_sources, "path,format[,kind[,manifest]] (repeatable)");
  run_over.add_cleaning(*run);
  run_over.add_matcher(*run);
  run->add_option("--classes", run_classes, "Natural-breaks class count, default 5");
  run->add_option("--workers", run_workers, "Worker threads, default: all available");
  run->add_option("--out", run_out, "Output directory");
  run->add_flag("--dump-matched", run_dump, "Also write matched.csv");

  // clean
  auto* clean_cmd = app.add_subcommand("clean", "Parse and clean tracks, assign periods");
  TrackArgs clean_tracks;
  Overrides clean_over;
  std::string clean_out = ".";
  clean_tracks.add_to(*clean_cmd);
  clean_over.add_cleaning(*clean_cmd);
  clean_cmd->add_option("--out", clean_out, "Output directory");

  // match
  auto* match_cmd = app.add_subcommand("match", "Map-match (cleaned) tracks");
  NetworkArgs match_net;
  TrackArgs match_tracks;
  Overrides match_over;
  std::optional<int> match_workers;
  std::string match_out = ".";
  match_net.add_to(*match_cmd);
  match_tracks.add_to(*match_cmd);
  match_over.add_matcher(*match_cmd);
  match_cmd->add_option("--periods", match_over.periods, "Four interior period boundaries in hours");
  match_cmd->add_option("--workers", match_workers, "Worker threads");
  match_cmd->add_option("--out", match_out, "Output directory");

  // score
  auto* score_cmd = app.add_subcommand("score", "p-index per segment from matched.csv");
  std::string score_matched;
  std::optional<int> score_workers;
  std::string score_out = ".";
  score_cmd->add_option("--matched", score_matched, "matched.csv from the match stage")->required();
  score_cmd->add_option("--workers", score_workers, "Worker threads");
  score_cmd->add_option("--out", score_out, "Output directory");

  // export
  auto* export_cmd = app.add_subcommand("export", "Classified GeoJSON per (kind, scope)");
  NetworkArgs export_net;
  std::string export_scores;
  std::size_t export_classes = kDefaultClasses;
  std::string export_scope;
  std::string export_kind;
  std::string export_out = ".";
  export_net.add_to(*export_cmd);
  export_cmd->add_option("--scores", export_scores, "scores.csv from the score stage")->required();
  export_cmd->add_option("--classes", export_classes, "Natural-breaks class count");
  export_cmd->add_option("--scope", export_scope, "Only this scope (global, P1..P5)");
  export_cmd->add_option("--kind", export_kind, "Only this kind (walk_run, cycle)");
  export_cmd->add_option("--out", export_out, "Output directory");

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Hourly histogram and per-period summary");
  TrackArgs stats_tracks;
  Overrides stats_over;
  std::string stats_out = ".";
  stats_tracks.add_to(*stats_cmd);
  stats_over.add_cleaning(*stats_cmd);
  stats_cmd->add_option("--out", stats_out, "Output directory");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Synthetic tracks with ground truth");
  NetworkArgs synth_net;
  std::string synth_grid;
  GridSpec grid;
  SynthParams sp;
  std::string synth_kind = "mixed";
  std::string synth_out = "synth";
  synth_net.add_to(*synth_cmd);
  synth_cmd->add_option("--grid", synth_grid, "Generate a ROWSxCOLS vertex grid instead of --network");
  synth_cmd->add_option("--grid-spacing", grid.spacing_m, "Grid spacing in meters");
  synth_cmd->add_option("--max-segments", grid.max_segments, "Keep only the first N grid segments");
  synth_cmd->add_option("--users", sp.users, "Number of users");
  synth_cmd->add_option("--activities", sp.activities, "Activities per user");
  synth_cmd->add_option("--noise-m", sp.noise_m, "Gaussian position noise std. dev. (m)");
  synth_cmd->add_option("--spacing-m", sp.spacing_m, "Distance between samples (m)");
  synth_cmd->add_option("--points", sp.points_per_track, "Points per track");
  synth_cmd->add_option("--kind", synth_kind, "walk_run, cycle or mixed");
  synth_cmd->add_option("--seed", sp.seed, "64-bit seed");
  synth_cmd->add_option("--utc-offset-min", sp.utc_offset_min, "UTC offset of generated timestamps");
  synth_cmd->add_option("--out", synth_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }
  if (quiet) spdlog::set_level(spdlog::level::warn);

  try {
    if (*run) {
      PipelineConfig cfg;
      cfg.workers = default_workers();
      if (!run_config.empty()) cfg = PipelineConfig::load(run_config);
      if (!run_net.geojson.empty()) cfg.network_geojson = run_net.geojson;
      if (!run_net.dir.empty()) {
        cfg.vertices = fs::path(run_net.dir) / "vertices.csv";
        cfg.segments = fs::path(run_net.dir) / "segments.csv";
      }
      if (!run_net.vertices.empty()) cfg.vertices = run_net.vertices;
      if (!run_net.segments.empty()) cfg.segments = run_net.segments;
      for (const auto& s : run_sources) cfg.sources.push_back(parse_track_source(s));
      run_over.apply(cfg);
      if (run_classes) cfg.classes = *run_classes;
      if (run_workers) cfg.workers = *run_workers;
      if (!run_out.empty()) cfg.out_dir = run_out;
      if (run_dump) cfg.dump_matched = true;
      const auto report = run_pipeline(cfg);
      if (!quiet) std::cout << report.to_text();
      return 0;
    }

    if (*clean_cmd) {
      PipelineConfig cfg;
      clean_over.apply(cfg);
      auto parsed = clean_tracks.parse();
      std::vector<Track> accepted;
      std::ostringstream rep;
      rep << "track_id,user_id,kind,status,reason,period\n";
      for (auto& t : parsed.tracks) {
        const auto res = clean(t, cfg.cleaning);
        rep << csv::quote(t.track_id) << ',' << csv::quote(t.user_id) << ',' << to_string(t.kind) << ','
            << (res.accepted() ? "accepted" : "rejected") << ',' << to_string(res.reason) << ',';
        if (res.accepted()) {
          rep << to_string(assign_period(t, cfg.periods));
          accepted.push_back(std::move(t));
        }
        rep << '\n';
      }
      write_file(fs::path(clean_out) / "accepted_tracks.csv",
                 render([&](std::ostream& o) { write_tracks_csv(accepted, o); }));
      write_file(fs::path(clean_out) / "clean_report.csv", rep.str());
      spdlog::info("{} parsed, {} accepted, {} malformed records skipped", parsed.tracks.size(),
                   accepted.size(), parsed.rejected_records);
      return 0;
    }

    if (*match_cmd) {
      PipelineConfig cfg;
      match_over.apply(cfg);
      cfg.matcher.validate();
      const auto net = match_net.load();
      const auto parsed = match_tracks.parse();
      const auto matched = match_tracks_parallel(parsed.tracks, net, cfg.matcher,
                                                 match_workers.value_or(default_workers()));
      std::vector<MatchedActivity> acts;
      for (std::size_t i = 0; i < matched.size(); ++i) {
        const auto& t = parsed.tracks[i];
        acts.push_back({matched[i], t.user_id, t.kind, assign_period(t, cfg.periods)});
      }
      write_file(fs::path(match_out) / "matched.csv",
                 render([&](std::ostream& o) { write_matched_csv(net, acts, o); }));
      return 0;
    }

    if (*score_cmd) {
      const auto usage = read_matched_summaries(score_matched);
      const auto tables = accumulate_parallel(usage, score_workers.value_or(default_workers()));
      const auto scores = evaluate(tables);
      write_file(fs::path(score_out) / "scores.csv", render([&](std::ostream& o) { write_scores_csv(scores, o); }));
      return 0;
    }

    if (*export_cmd) {
      const auto net = export_net.load();
      const auto scores = read_scores_csv(export_scores);
      for (auto kind : kActivityKinds) {
        if (!export_kind.empty() && export_kind != to_string(kind)) continue;
        for (auto scope : kScopes) {
          if (!export_scope.empty() && export_scope != to_string(scope)) continue;
          write_file(fs::path(export_out) / geojson_filename(kind, scope),
                     export_geojson(net, scores, scope, kind, export_classes));
        }
      }
      if (!export_kind.empty() && !parse_activity_kind(export_kind)) throw InputError("unknown kind '" + export_kind + "'");
      if (!export_scope.empty() && !parse_scope(export_scope)) throw InputError("unknown scope '" + export_scope + "'");
      return 0;
    }

    if (*stats_cmd) {
      PipelineConfig cfg;
      stats_over.apply(cfg);
      auto parsed = stats_tracks.parse();
      std::vector<Track> accepted;
      std::vector<PeriodRecord> records;
      for (auto& t : parsed.tracks) {
        if (!clean(t, cfg.cleaning).accepted()) continue;
        records.push_back({t.kind, assign_period(t, cfg.periods)});
        accepted.push_back(std::move(t));
      }
      for (auto kind : kActivityKinds) {
        if (!stats_tracks.kind.empty() && stats_tracks.kind != to_string(kind)) continue;
        write_file(fs::path(stats_out) / ("histogram_" + std::string(to_string(kind)) + ".csv"),
                   render([&](std::ostream& o) { write_histogram_csv(hourly_histogram(accepted, kind), o); }));
      }
      write_file(fs::path(stats_out) / "period_summary.csv",
                 render([&](std::ostream& o) { write_period_summary_csv(period_summary(records), o); }));
      return 0;
    }

    if (*synth_cmd) {
      if (synth_kind == "walk_run") {
        sp.kinds = KindMix::walk_run;
      } else if (synth_kind == "cycle") {
        sp.kinds = KindMix::cycle;
      } else if (synth_kind == "mixed") {
        sp.kinds = KindMix::mixed;
      } else {
        throw InputError("--kind must be walk_run, cycle or mixed");
      }
      RoadNetwork net;
      const fs::path out(synth_out);
      if (!synth_grid.empty()) {
        const auto x = synth_grid.find('x');
        if (x == std::string::npos) throw InputError("--grid must look like ROWSxCOLS");
        try {
          grid.rows = std::stoul(synth_grid.substr(0, x));
          grid.cols = std::stoul(synth_grid.substr(x + 1));
        } catch (const std::exception&) {
          throw InputError("--grid must look like ROWSxCOLS");
        }
        net = make_grid_network(grid);
        fs::create_directories(out);
        write_network_csv(net, out / "vertices.csv", out / "segments.csv");
      } else {
        net = synth_net.load();
      }
      const auto data = synthesize(net, sp);
      write_file(out / "tracks.csv", render([&](std::ostream& o) { write_tracks_csv(data.tracks, o); }));
      write_file(out / "ground_truth.csv",
                 render([&](std::ostream& o) { write_ground_truth_csv(net, data.truth, o); }));
      write_file(out / "ground_truth_points.csv",
                 render([&](std::ostream& o) { write_ground_truth_points_csv(net, data.truth, o); }));
      spdlog::info("generated {} tracks on {} segments", data.tracks.size(), net.segment_count());
      return 0;
    }
  } catch (const InvariantError& e) {
    spdlog::error("internal invariant violated: {}", e.what());
    return kExitInvariant;
  } catch (const InputError& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
