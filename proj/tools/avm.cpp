#include "avm/bench.hpp"
#include "avm/config.hpp"
#include "avm/error.hpp"
#include "avm/evaluate.hpp"
#include "avm/pipeline.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace {

int exit_code(avm::ErrorCategory c) {
  switch (c) {
    case avm::ErrorCategory::kUsage: return 2;
    case avm::ErrorCategory::kParse: return 3;
    case avm::ErrorCategory::kIo: return 4;
    default: return 5;
  }
}

// One --<dotted.key> option per config key, applied after --config.
struct ConfigFlags {
  std::string file;
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    app->add_option("--config", file, "JSON config file (flat dotted keys)");
    for (const std::string& key : avm::config_keys()) {
      app->add_option("--" + key, values[key], "config key " + key)->group("Config keys");
    }
  }

  avm::RunConfig resolve(CLI::App* app) const {
    avm::RunConfig cfg;
    if (!file.empty()) cfg = avm::load_config(file);
    for (const auto& [key, text] : values) {
      if (app->count("--" + key) > 0) avm::set_config_value(cfg, key, text);
    }
    cfg.validate();
    return cfg;
  }
};

void print_summary(const avm::RunSummary& s) {
  std::printf("frames=%zu flagged=%zu skipped=%zu roots=%zu planes=%zu converged=%zu\n", s.frames,
              s.flagged, s.skipped, s.stats.roots, s.stats.planes, s.stats.converged_planes);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic adaptive voxel map LiDAR odometry"};
  app.require_subcommand(1);

  ConfigFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "odometry over a scan directory");
  run_flags.attach(run);

  ConfigFlags sim_flags;
  avm::SimulateOptions sim_opts;
  std::string sim_out, scene_file;
  CLI::App* simulate = app.add_subcommand("simulate", "generate a scene and scans");
  sim_flags.attach(simulate);
  simulate->add_option("--out", sim_out, "output directory")->required();
  simulate->add_option("--scene", sim_opts.scene, "wall | room | corridor | forest | hall");
  simulate->add_option("--scene-file", scene_file, "scene text file (overrides --scene)");
  simulate->add_option("--trajectory", sim_opts.trajectory, "static | corridor | loop | rotation");
  simulate->add_option("--frames", sim_opts.frames, "number of frames");
  simulate->add_option("--pattern", sim_opts.pattern, "spherical | rosette");
  simulate->add_option("--speed", sim_opts.params.speed, "corridor speed (m/frame)");
  simulate->add_option("--radius", sim_opts.params.radius, "loop radius (m)");

  std::string est_path, gt_path, errors_path;
  avm::EvalOptions eval_opts;
  CLI::App* eval = app.add_subcommand("eval", "RMSE after alignment on the first poses");
  eval->add_option("--estimate", est_path, "estimated trajectory")->required();
  eval->add_option("--truth", gt_path, "ground-truth trajectory")->required();
  eval->add_option("--align-fraction", eval_opts.align_fraction, "leading fraction used to align");
  eval->add_flag("--icp", eval_opts.icp, "nearest-neighbour ICP alignment");
  eval->add_option("--errors", errors_path, "write per-frame errors here");

  avm::QueryBenchOptions qb;
  std::size_t bench_frames = 20;
  ConfigFlags bench_flags;
  CLI::App* bench = app.add_subcommand("bench", "query scaling and stage latency");
  bench_flags.attach(bench);
  bench->add_option("--roots", qb.root_counts, "root counts for the query sweep");
  bench->add_option("--queries", qb.queries, "probes per map");
  bench->add_option("--repeats", qb.repeats, "timing rounds (best is kept)");
  bench->add_option("--min-seconds", qb.min_seconds, "minimum wall time spent on timing rounds");
  bench->add_flag("--empty", qb.empty, "probe maps without planes");
  bench->add_option("--frames", bench_frames, "corridor frames for the stage breakdown (0 skips)");

  ConfigFlags dump_flags;
  std::string dump_out;
  CLI::App* dump = app.add_subcommand("map-dump", "run odometry and print the final map");
  dump_flags.attach(dump);
  dump->add_option("--out", dump_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error[usage-error]: %s\n", e.what());
    return 2;
  }

  try {
    if (*run) {
      print_summary(avm::run_odometry(run_flags.resolve(run)));
    } else if (*simulate) {
      avm::RunConfig cfg = sim_flags.resolve(simulate);
      avm::sim::Scene scene;
      if (!scene_file.empty()) {
        std::ifstream in(scene_file);
        if (!in) throw avm::Error(avm::ErrorCategory::kIo, "cannot open '" + scene_file + "'");
        scene = avm::sim::read_scene(in);
      } else {
        scene = avm::sim::scene_by_name(sim_opts.scene);
      }
      const auto poses = avm::sim::make_trajectory(avm::sim::trajectory_kind(sim_opts.trajectory),
                                                   sim_opts.frames, sim_opts.params);
      const auto scans = avm::simulate(scene, poses, avm::pattern_by_name(sim_opts.pattern),
                                       cfg.odometry.noise, cfg.seed);
      cfg.scans = sim_out;
      cfg.format = "sim";
      avm::write_dataset(sim_out, scene, scans, cfg);
      std::size_t points = 0;
      for (const auto& s : scans) points += s.points.size();
      std::printf("frames=%zu points=%zu dir=%s\n", scans.size(), points, sim_out.c_str());
    } else if (*eval) {
      const auto res = avm::evaluate(avm::read_poses(est_path), avm::read_poses(gt_path), eval_opts);
      if (!errors_path.empty()) {
        std::ofstream os(errors_path);
        if (!os) throw avm::Error(avm::ErrorCategory::kIo, "cannot write '" + errors_path + "'");
        for (double e : res.errors) os << e << '\n';
      }
      std::printf("rmse=%.6f frames=%zu aligned=%zu\n", res.rmse, res.errors.size(), res.aligned);
    } else if (*bench) {
      const avm::RunConfig cfg = bench_flags.resolve(bench);
      qb.seed = cfg.seed;
      const auto scaling = avm::bench_query_scaling(qb, cfg.odometry.map);
      avm::StageReport stages;
      if (bench_frames > 0) stages = avm::bench_stages(cfg.odometry, bench_frames, cfg.seed);
      std::fputs(avm::format_report(scaling, stages).c_str(), stdout);
    } else if (*dump) {
      avm::RunConfig cfg = dump_flags.resolve(dump);
      if (cfg.scans.empty()) throw avm::Error(avm::ErrorCategory::kUsage, "no scan directory given");
      const auto scans = avm::list_scans(cfg.scans, avm::parse_scan_format(cfg.format));
      const auto stamps = avm::load_stamps(cfg.scans, scans.size());
      std::ostringstream traj;
      std::ofstream file;
      if (!dump_out.empty()) {
        file.open(dump_out);
        if (!file) throw avm::Error(avm::ErrorCategory::kIo, "cannot write '" + dump_out + "'");
      }
      std::ostream& os = dump_out.empty() ? std::cout : file;
      avm::run_odometry(cfg, scans, stamps, traj, nullptr, &os);
    }
  } catch (const avm::Error& e) {
    std::fprintf(stderr, "error[%s]: %s\n", std::string(avm::to_string(e.category())).c_str(), e.what());
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error[internal]: %s\n", e.what());
    return 5;
  }
  return 0;
}
