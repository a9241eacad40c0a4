#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>

namespace avm {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat32 = Eigen::Matrix<double, 3, 2>;
using Mat63 = Eigen::Matrix<double, 6, 3>;
using Row6 = Eigen::Matrix<double, 1, 6>;

/// Rigid pose with tangent-space uncertainty. Rotation covariance is
/// expressed for the right perturbation R * exp(dtheta).
struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();
  Mat3 cov_R = Mat3::Zero();
  Mat3 cov_t = Mat3::Zero();

  Vec3 apply(const Vec3& p) const { return R * p + t; }
};

Mat3 skew(const Vec3& v);

Mat3 so3_exp(const Vec3& theta);
Vec3 so3_log(const Mat3& R);

/// Right Jacobian of SO(3) and its inverse.
Mat3 so3_right_jacobian(const Vec3& theta);
Mat3 so3_right_jacobian_inv(const Vec3& theta);

/// Closest rotation in Frobenius norm (SVD projection, det = +1).
Mat3 orthonormalize(const Mat3& R);

bool is_rotation(const Mat3& R, double tol = 1e-9);

struct SymEigen3 {
  Mat3 U;                       // columns are eigenvectors u1, u2, u3
  std::array<double, 3> lambda; // descending: lambda[0] >= lambda[1] >= lambda[2]
};

/// Eigendecomposition of a symmetric 3x3 matrix. Eigenvalues are returned in
/// descending order. Each eigenvector has its largest-magnitude component
/// positive.
SymEigen3 sym_eigen3(const Mat3& A);

template <typename Derived>
typename Derived::PlainObject symmetrized(const Eigen::MatrixBase<Derived>& M) {
  return (0.5 * (M + M.transpose())).eval();
}

/// Flips v so its largest-magnitude component is positive (first index wins ties).
Vec3 canonical_sign(const Vec3& v);

/// Angle between two unit vectors ignoring sign, in radians.
double axis_angle_between(const Vec3& a, const Vec3& b);

}  // namespace avm
