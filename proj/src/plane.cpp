#include "avm/plane.hpp"

#include "avm/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace avm {
namespace {

template <typename Get>
PlaneFit fit_impl(std::size_t n, Get&& get) {
  if (n < 3) {
    throw Error(ErrorCategory::kInsufficientPoints,
                "plane fit needs at least 3 points, got " + std::to_string(n));
  }
  PlaneFit fit;
  fit.count = n;
  for (std::size_t i = 0; i < n; ++i) fit.centroid += get(i);
  fit.centroid /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 r = get(i) - fit.centroid;
    fit.scatter.noalias() += r * r.transpose();
  }
  fit.scatter = symmetrized(fit.scatter / static_cast<double>(n));
  fit.eig = sym_eigen3(fit.scatter);
  return fit;
}

// Row m of F for one point, m in {0, 1}.
Eigen::RowVector3d f_row(const Vec3& r, const Vec3& um, const Vec3& n, double denom) {
  return (r.transpose() * (um * n.transpose() + n * um.transpose())) / denom;
}

}  // namespace

PlaneFit fit_plane(std::span<const Vec3> points) {
  return fit_impl(points.size(), [&](std::size_t i) -> const Vec3& { return points[i]; });
}

PlaneFit fit_plane(std::span<const WorldPoint> points) {
  return fit_impl(points.size(), [&](std::size_t i) -> const Vec3& { return points[i].p; });
}

Vec3 orient_normal(const PlaneFit& fit, const Vec3& viewpoint) {
  const Vec3 u3 = fit.min_eigenvector();
  const double s = u3.dot(viewpoint - fit.centroid);
  if (s > 0.0) return u3;
  if (s < 0.0) return -u3;
  return canonical_sign(u3);
}

Vec3 align_normal(const PlaneFit& fit, const Vec3& reference) {
  const Vec3 u3 = fit.min_eigenvector();
  return u3.dot(reference) < 0.0 ? Vec3(-u3) : u3;
}

double degeneracy_floor(const PlaneFit& fit) {
  return 1e-6 * std::max(fit.eig.lambda[0], 1e-12);
}

bool is_degenerate(const PlaneFit& fit) {
  return std::abs(fit.eig.lambda[2] - fit.eig.lambda[1]) < degeneracy_floor(fit);
}

std::vector<Mat63> plane_jacobians(const PlaneFit& fit, std::span<const Vec3> points,
                                   const Vec3& normal) {
  if (is_degenerate(fit)) {
    throw Error(ErrorCategory::kDegeneratePlane, "lambda2 and lambda3 coincide");
  }
  const double n_count = static_cast<double>(fit.count);
  const Mat3& U = fit.eig.U;
  const double d0 = n_count * (fit.eig.lambda[2] - fit.eig.lambda[0]);
  const double d1 = n_count * (fit.eig.lambda[2] - fit.eig.lambda[1]);
  std::vector<Mat63> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3 r = points[i] - fit.centroid;
    Mat3 F = Mat3::Zero();
    F.row(0) = f_row(r, U.col(0), normal, d0);
    F.row(1) = f_row(r, U.col(1), normal, d1);
    out[i].topRows<3>() = U * F;
    out[i].bottomRows<3>() = Mat3::Identity() / n_count;
  }
  return out;
}

Mat6 plane_cov(std::span<const Mat63> jacobians, std::span<const Mat3> point_covs) {
  if (jacobians.size() != point_covs.size()) {
    throw Error(ErrorCategory::kInvalidArgument, "jacobian and covariance counts differ");
  }
  Mat6 cov = Mat6::Zero();
  for (std::size_t i = 0; i < jacobians.size(); ++i) {
    cov.noalias() += jacobians[i] * point_covs[i] * jacobians[i].transpose();
  }
  return symmetrized(cov);
}

Mat6 plane_cov_from_points(const PlaneFit& fit, std::span<const WorldPoint> points,
                           const Vec3& normal) {
  if (is_degenerate(fit)) {
    throw Error(ErrorCategory::kDegeneratePlane, "lambda2 and lambda3 coincide");
  }
  const double n_count = static_cast<double>(fit.count);
  const Mat3& U = fit.eig.U;
  const double d0 = n_count * (fit.eig.lambda[2] - fit.eig.lambda[0]);
  const double d1 = n_count * (fit.eig.lambda[2] - fit.eig.lambda[1]);
  Mat6 cov = Mat6::Zero();
  Mat63 J;
  J.bottomRows<3>() = Mat3::Identity() / n_count;
  for (const WorldPoint& wp : points) {
    const Vec3 r = wp.p - fit.centroid;
    Mat3 F = Mat3::Zero();
    F.row(0) = f_row(r, U.col(0), normal, d0);
    F.row(1) = f_row(r, U.col(1), normal, d1);
    J.topRows<3>() = U * F;
    cov.noalias() += J * wp.cov * J.transpose();
  }
  return symmetrized(cov);
}

PlaneFeature make_plane_feature(std::span<const WorldPoint> points, const Vec3& orientation_hint,
                                bool hint_is_viewpoint, double threshold) {
  PlaneFeature f;
  f.fit = fit_plane(points);
  f.center = f.fit.centroid;
  f.normal = hint_is_viewpoint ? orient_normal(f.fit, orientation_hint)
                               : align_normal(f.fit, orientation_hint);
  f.is_plane = f.fit.min_eigenvalue() < threshold;
  if (!f.is_plane) return f;
  f.cov = plane_cov_from_points(f.fit, points, f.normal);
  return f;
}

}  // namespace avm
