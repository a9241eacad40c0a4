#pragma once

#include "avm/estimator.hpp"
#include "avm/voxel_map.hpp"

#include <span>
#include <string>
#include <vector>

namespace avm {

struct OdometryConfig {
  SensorNoise noise;
  MapConfig map;
  EstimatorConfig estimator;
  double downsample_leaf = 0.25;  // m, half the finest leaf at the default map

  void validate() const;
};

struct StageTimes {
  double downsample_ms = 0.0;
  double match_ms = 0.0;
  double update_ms = 0.0;
  double insert_ms = 0.0;
  double total_ms = 0.0;
};

struct FrameDiagnostics {
  std::size_t frame = 0;
  double stamp = 0.0;
  std::size_t points_in = 0;
  std::size_t points_used = 0;
  std::size_t matches = 0;
  int iterations = 0;
  double cost_before = 0.0;
  double cost_after = 0.0;
  bool flagged = false;
  std::string flag_reason;
  StageTimes times;

  /// key=value record on one line.
  std::string to_line() const;
};

/// Frame-to-map odometry: constant-velocity prior, match at the prior,
/// iterated update, then registration of the scan into the map at the
/// posterior. The first frame defines the world frame.
class Odometry {
 public:
  explicit Odometry(OdometryConfig cfg);

  FrameDiagnostics process(std::span<const RawPoint> scan, double stamp);

  const State& state() const { return history_.back(); }
  const std::vector<State>& history() const { return history_; }
  const VoxelMap& map() const { return map_; }
  const OdometryConfig& config() const { return cfg_; }

 private:
  OdometryConfig cfg_;
  VoxelMap map_;
  std::vector<State> history_;
};

}  // namespace avm
