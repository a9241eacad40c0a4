#pragma once

#include "avm/odometry.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace avm {

struct QueryScalingPoint {
  std::size_t roots = 0;
  std::size_t planes = 0;  // planes returned over one pass of probes
  double mean_ns = 0.0;    // per query, best round
};

struct QueryBenchOptions {
  std::vector<std::size_t> root_counts = {1000, 10000, 100000};
  std::size_t points_per_root = 12;
  std::size_t queries = 10000;
  int repeats = 50;          // minimum timing rounds
  double min_seconds = 3.0;  // rounds continue until this much time has passed
  std::uint64_t seed = 42;
  bool empty = false;  // probe maps with no planes at all
};

/// Builds one map per root count (a cube of populated roots, each holding a
/// planar patch) and times `query` on uniform probes over the populated
/// region. Timing rounds alternate between the maps and run for at least
/// `repeats` rounds and `min_seconds`; each map keeps its best round.
std::vector<QueryScalingPoint> bench_query_scaling(const QueryBenchOptions& opts,
                                                   const MapConfig& cfg = {});

struct StageStats {
  std::string name;
  double mean_ms = 0.0;
  double std_ms = 0.0;
  double max_ms = 0.0;
};

struct StageReport {
  std::vector<StageStats> stages;  // downsample, match, update, insert, total
  double stage_sum_ms = 0.0;       // mean of the per-frame stage sums
  double total_ms = 0.0;           // mean per-frame total
  std::size_t frames = 0;
};

StageReport summarize_stages(const std::vector<FrameDiagnostics>& frames);

/// Odometry on a simulated corridor; per-stage latency statistics.
StageReport bench_stages(const OdometryConfig& cfg, std::size_t frames, std::uint64_t seed);

std::string format_report(const std::vector<QueryScalingPoint>& scaling,
                          const StageReport& stages);

}  // namespace avm
