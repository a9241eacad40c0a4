#include "avm/pipeline.hpp"

#include "avm/error.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace avm {

void write_header(std::ostream& os, const std::string& kind, const RunConfig& cfg) {
  os << "# avm " << kind << " v1\n";
  os << "# config " << config_line(cfg) << '\n';
}

std::vector<double> load_stamps(const std::string& dir, std::size_t frames) {
  const std::filesystem::path path = std::filesystem::path(dir) / "times.txt";
  std::vector<double> stamps;
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ss(line);
      double s;
      if (!(ss >> s)) {
        throw Error(ErrorCategory::kParse, "times.txt: malformed line " + std::to_string(lineno));
      }
      stamps.push_back(s);
    }
    if (stamps.size() < frames) {
      throw Error(ErrorCategory::kParse, "times.txt: " + std::to_string(stamps.size()) +
                                             " stamps for " + std::to_string(frames) + " scans");
    }
    stamps.resize(frames);
  } else {
    for (std::size_t i = 0; i < frames; ++i) stamps.push_back(0.1 * static_cast<double>(i));
  }
  for (std::size_t i = 1; i < stamps.size(); ++i) {
    if (!(stamps[i] > stamps[i - 1])) {
      throw Error(ErrorCategory::kParse, "timestamps not strictly increasing at frame " +
                                             std::to_string(i));
    }
  }
  return stamps;
}

RunSummary run_odometry(const RunConfig& cfg, const std::vector<std::string>& scans,
                        const std::vector<double>& stamps, std::ostream& trajectory,
                        std::ostream* diag, std::ostream* map_dump) {
  cfg.validate();
  if (stamps.size() != scans.size()) {
    throw Error(ErrorCategory::kInvalidArgument, "one stamp per scan required");
  }
  const ScanFormat format = parse_scan_format(cfg.format);
  Odometry odom(cfg.odometry);
  RunSummary summary;

  for (std::size_t i = 0; i < scans.size(); ++i) {
    try {
      const std::vector<RawPoint> scan = load_scan(scans[i], format);
      FrameDiagnostics d = odom.process(scan, stamps[i]);
      d.frame = i;
      const State& s = odom.state();
      PoseRecord rec;
      rec.R = s.R;
      rec.t = s.t;
      if (cfg.timestamps) rec.stamp = stamps[i];
      trajectory << format_pose_line(rec) << '\n';
      trajectory.flush();
      if (diag) {
        *diag << d.to_line() << '\n';
        diag->flush();
      }
      if (d.flagged) ++summary.flagged;
      summary.diagnostics.push_back(std::move(d));
      ++summary.frames;
    } catch (const Error& e) {
      if (e.category() == ErrorCategory::kUsage) throw;
      ++summary.skipped;
      if (diag) {
        *diag << "frame=" << i << " skipped=1 error=" << to_string(e.category()) << " reason=\""
              << e.what() << "\"\n";
        diag->flush();
      }
    }
  }
  summary.stats = odom.map().stats();
  if (map_dump) {
    write_header(*map_dump, "map", cfg);
    odom.map().dump(*map_dump);
  }
  return summary;
}

RunSummary run_odometry(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.scans.empty()) throw Error(ErrorCategory::kUsage, "no scan directory given");
  const std::vector<std::string> scans = list_scans(cfg.scans, parse_scan_format(cfg.format));
  const std::vector<double> stamps = load_stamps(cfg.scans, scans.size());

  std::ofstream traj(cfg.output);
  if (!traj) throw Error(ErrorCategory::kIo, "cannot write '" + cfg.output + "'");
  write_header(traj, "trajectory", cfg);
  traj.flush();

  std::ofstream diag_file;
  if (!cfg.diagnostics.empty()) {
    diag_file.open(cfg.diagnostics);
    if (!diag_file) throw Error(ErrorCategory::kIo, "cannot write '" + cfg.diagnostics + "'");
    write_header(diag_file, "diagnostics", cfg);
  }

  std::ofstream dump;
  if (!cfg.map_dump.empty()) {
    dump.open(cfg.map_dump);
    if (!dump) throw Error(ErrorCategory::kIo, "cannot write '" + cfg.map_dump + "'");
  }
  return run_odometry(cfg, scans, stamps, traj, diag_file.is_open() ? &diag_file : nullptr,
                      dump.is_open() ? &dump : nullptr);
}

sim::ScanPattern pattern_by_name(const std::string& name) {
  sim::ScanPattern p;
  if (name == "spherical") {
    p.kind = sim::SphericalPattern{};
  } else if (name == "rosette") {
    p.kind = sim::RosettePattern{};
  } else {
    throw Error(ErrorCategory::kUsage, "unknown scan pattern '" + name + "'");
  }
  return p;
}

std::vector<sim::SimScan> simulate(const sim::Scene& scene, const std::vector<Pose>& poses,
                                   const sim::ScanPattern& pattern, const SensorNoise& noise,
                                   std::uint64_t seed) {
  std::vector<sim::SimScan> out;
  out.reserve(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    out.push_back(sim::corrupt(sim::raycast(scene, poses[i], pattern), noise, Rng::derive(seed, i)));
  }
  return out;
}

void write_dataset(const std::string& dir, const sim::Scene& scene,
                   const std::vector<sim::SimScan>& scans, const RunConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream os(fs::path(dir) / name);
    if (!os) throw Error(ErrorCategory::kIo, "cannot write '" + (fs::path(dir) / name).string() + "'");
    return os;
  };
  {
    std::ofstream os = open("scene.txt");
    write_header(os, "scene", cfg);
    sim::write_scene(os, scene);
  }
  std::ofstream gt = open("ground_truth.txt");
  write_header(gt, "ground-truth", cfg);
  std::ofstream times = open("times.txt");
  char name[64];
  for (std::size_t i = 0; i < scans.size(); ++i) {
    std::snprintf(name, sizeof name, "frame_%06zu.sim", i);
    std::ofstream os = open(name);
    write_sim_scan(os, scans[i]);
    PoseRecord rec;
    rec.R = scans[i].pose.R;
    rec.t = scans[i].pose.t;
    gt << format_pose_line(rec) << '\n';
    char stamp[32];
    std::snprintf(stamp, sizeof stamp, "%.6f\n", 0.1 * static_cast<double>(i));
    times << stamp;
  }
}

}  // namespace avm
