#pragma once

#include "avm/config.hpp"
#include "avm/io.hpp"
#include "avm/simulator.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace avm {

struct RunSummary {
  std::size_t frames = 0;
  std::size_t flagged = 0;
  std::size_t skipped = 0;
  MapStats stats;
  std::vector<FrameDiagnostics> diagnostics;
};

/// Frame stamps: `times.txt` in the scan directory (one per line) when
/// present, else 0.1 s spacing. Throws kParse on non-monotone stamps.
std::vector<double> load_stamps(const std::string& dir, std::size_t frames);

/// Sequential odometry over `scans` with stamps. Pose lines are flushed per
/// frame to `trajectory`; diagnostics lines to `diag` and the final map to
/// `map_dump` when non-null. Frames
/// whose scan fails to load or whose update errors are logged and skipped.
RunSummary run_odometry(const RunConfig& cfg, const std::vector<std::string>& scans,
                        const std::vector<double>& stamps, std::ostream& trajectory,
                        std::ostream* diag = nullptr, std::ostream* map_dump = nullptr);

/// File-level driver: scan directory in, trajectory/diagnostics/map dump out.
RunSummary run_odometry(const RunConfig& cfg);

/// Writes the `# avm ...` header lines (format tag plus resolved config).
void write_header(std::ostream& os, const std::string& kind, const RunConfig& cfg);

struct SimulateOptions {
  std::string scene = "corridor";
  std::string trajectory = "corridor";
  std::size_t frames = 100;
  std::string pattern = "spherical";  // spherical | rosette
  sim::TrajectoryParams params;
};

sim::ScanPattern pattern_by_name(const std::string& name);

/// Ground-truth poses and corrupted scans for a scene/trajectory pair.
std::vector<sim::SimScan> simulate(const sim::Scene& scene, const std::vector<Pose>& poses,
                                   const sim::ScanPattern& pattern, const SensorNoise& noise,
                                   std::uint64_t seed);

/// Writes scans as frame_%06d.sim, `times.txt`, `ground_truth.txt` and
/// `scene.txt` into `dir`.
void write_dataset(const std::string& dir, const sim::Scene& scene,
                   const std::vector<sim::SimScan>& scans, const RunConfig& cfg);

}  // namespace avm
