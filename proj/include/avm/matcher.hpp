#pragma once

#include "avm/plane.hpp"
#include "avm/uncertainty.hpp"
#include "avm/voxel_map.hpp"

#include <optional>
#include <span>
#include <vector>

namespace avm {

inline constexpr double kMinResidualVariance = 1e-12;

/// Signed distance n^T (p - q).
double point_to_plane(const Vec3& p, const PlaneFeature& plane);

struct ResidualVariance {
  double value = kMinResidualVariance;
  bool floored = false;
};

/// Variance of the point-to-plane distance from the plane covariance and the
/// point covariance, J = [(p - q)^T, -n^T, n^T].
ResidualVariance residual_variance(const WorldPoint& p, const PlaneFeature& plane);

struct Match {
  std::size_t index = 0;  // position of the point in the matched scan
  WorldPoint point;
  const PlaneFeature* plane = nullptr;
  double distance = 0.0;
  double variance = 0.0;
  bool variance_floored = false;
};

struct GateResult {
  bool accepted = false;
  double distance = 0.0;
  double variance = 0.0;
  bool floored = false;
  /// -log of the Gaussian density up to a constant: d^2 / var + ln var.
  double score = 0.0;
};

inline constexpr double kGateSigmas = 3.0;

/// Gate test of one point against one plane.
GateResult gate(const WorldPoint& p, const PlaneFeature& plane, double sigmas = kGateSigmas);

/// Best gated plane among the map's candidates for `p`; empty when none pass.
std::optional<Match> match_point(const WorldPoint& p, const VoxelMap& map);

/// Order-preserving batch of match_point. `Match::index` is the input position.
std::vector<Match> match_scan(std::span<const WorldPoint> points, const VoxelMap& map);

}  // namespace avm

namespace avm {

/// Voxel-grid downsample in the sensor frame. Each occupied cell keeps the
/// return nearest its cell centroid; output follows first appearance.
/// A non-positive leaf returns the input unchanged.
std::vector<RawPoint> voxel_downsample(std::span<const RawPoint> scan, double leaf);

}  // namespace avm
