#pragma once

#include "avm/geom.hpp"
#include "avm/uncertainty.hpp"

#include <span>
#include <vector>

namespace avm {

/// Centroid and scatter of a point set with its eigensystem.
struct PlaneFit {
  Vec3 centroid = Vec3::Zero();
  Mat3 scatter = Mat3::Zero();  // (1/N) sum (p - q)(p - q)^T
  SymEigen3 eig;
  std::size_t count = 0;

  double min_eigenvalue() const { return eig.lambda[2]; }
  Vec3 min_eigenvector() const { return eig.U.col(2); }
};

/// Fitted plane (n, q) with the joint covariance of the stacked 6-vector
/// [n; q]. The normal block has n in its null space.
struct PlaneFeature {
  Vec3 normal = Vec3::UnitZ();
  Vec3 center = Vec3::Zero();
  Mat6 cov = Mat6::Zero();
  PlaneFit fit;
  bool is_plane = false;
  bool converged = false;

  Mat3 normal_cov() const { return cov.topLeftCorner<3, 3>(); }
};

PlaneFit fit_plane(std::span<const Vec3> points);
PlaneFit fit_plane(std::span<const WorldPoint> points);

/// Picks the sign of u3 so the normal faces the viewpoint. A viewpoint lying
/// in the plane falls back to the largest-component-positive rule.
Vec3 orient_normal(const PlaneFit& fit, const Vec3& viewpoint);

/// Picks the sign of u3 on the same side as a previous normal.
Vec3 align_normal(const PlaneFit& fit, const Vec3& reference);

/// Degeneracy floor on |lambda3 - lambda2|.
double degeneracy_floor(const PlaneFit& fit);
bool is_degenerate(const PlaneFit& fit);

/// Per-point derivative of [n; q] (6x3 blocks). `normal` must be +u3 or -u3
/// of `fit`. Throws kDegeneratePlane when lambda2 and lambda3 coincide.
std::vector<Mat63> plane_jacobians(const PlaneFit& fit, std::span<const Vec3> points,
                                   const Vec3& normal);

/// First-order covariance of [n; q] from per-point covariances.
Mat6 plane_cov(std::span<const Mat63> jacobians, std::span<const Mat3> point_covs);

/// plane_cov over world points without materializing the Jacobian blocks.
Mat6 plane_cov_from_points(const PlaneFit& fit, std::span<const WorldPoint> points,
                           const Vec3& normal);

/// Fit, orientation and covariance in one pass over the points.
/// `threshold` is the plane test on lambda3 (m^2).
PlaneFeature make_plane_feature(std::span<const WorldPoint> points, const Vec3& orientation_hint,
                                bool hint_is_viewpoint, double threshold);

}  // namespace avm
