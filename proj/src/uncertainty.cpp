#include "avm/uncertainty.hpp"

#include "avm/error.hpp"

#include <cmath>

namespace avm {

void SensorNoise::validate() const {
  if (!(sigma_range > 0.0) || !(sigma_bearing > 0.0)) {
    throw Error(ErrorCategory::kInvalidArgument, "sensor noise sigmas must be positive");
  }
}

RawPoint RawPoint::from_cartesian(const Vec3& p) {
  const double r = p.norm();
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw Error(ErrorCategory::kInvalidArgument, "cannot convert zero or non-finite range");
  }
  return RawPoint{p / r, r};
}

Mat32 tangent_basis(const Vec3& bearing) {
  if (std::abs(bearing.norm() - 1.0) > 1e-6) {
    throw Error(ErrorCategory::kInvalidArgument, "tangent_basis needs a unit vector");
  }
  int k = 0;
  bearing.cwiseAbs().minCoeff(&k);
  const Vec3 axis = Vec3::Unit(k);
  Mat32 N;
  N.col(0) = (axis - axis.dot(bearing) * bearing).normalized();
  N.col(1) = bearing.cross(N.col(0));
  return N;
}

Mat3 local_point_cov(const RawPoint& rp, double range_var,
                     const Eigen::Matrix2d& bearing_cov) {
  const Vec3& w = rp.bearing;
  Eigen::Matrix<double, 3, 3> A;
  A.col(0) = w;
  A.rightCols<2>() = -rp.depth * skew(w) * tangent_basis(w);
  Mat3 noise = Mat3::Zero();
  noise(0, 0) = range_var;
  noise.bottomRightCorner<2, 2>() = bearing_cov;
  return symmetrized(A * noise * A.transpose());
}

Mat3 local_point_cov(const RawPoint& rp, const SensorNoise& noise) {
  return local_point_cov(rp, noise.range_var(), noise.bearing_cov());
}

WorldPoint world_point_cov(const RawPoint& rp, const Mat3& local_cov, const Pose& pose) {
  const Vec3 lp = rp.local();
  const Mat3 RK = pose.R * skew(lp);
  WorldPoint out;
  out.p = pose.R * lp + pose.t;
  out.cov = symmetrized(pose.R * local_cov * pose.R.transpose() +
                        RK * pose.cov_R * RK.transpose() + pose.cov_t);
  return out;
}

}  // namespace avm
