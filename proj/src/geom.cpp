#include "avm/geom.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace avm {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Mat3 so3_exp(const Vec3& theta) {
  const double angle = theta.norm();
  const Mat3 K = skew(theta);
  if (angle < 1e-8) {
    // second-order Taylor; the remainder is O(angle^3)
    return Mat3::Identity() + K + 0.5 * K * K;
  }
  const double a = std::sin(angle) / angle;
  const double b = (1.0 - std::cos(angle)) / (angle * angle);
  return Mat3::Identity() + a * K + b * K * K;
}

Vec3 so3_log(const Mat3& R) {
  const Vec3 vee(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  const double c = 0.5 * (R.trace() - 1.0);
  const double s = 0.5 * vee.norm();
  const double angle = std::atan2(s, c);
  if (angle < 1e-8) {
    return 0.5 * vee;
  }
  if (c > -0.99) {
    return angle / (2.0 * s) * vee;
  }
  // Near pi the antisymmetric part vanishes; the symmetric part is
  // c I + (1 - c) a a^T, so the axis is its dominant column. vee fixes the sign.
  const Mat3 S = 0.5 * (R + R.transpose()) - c * Mat3::Identity();
  int k = 0;
  S.diagonal().maxCoeff(&k);
  Vec3 axis = S.col(k).normalized();
  if (axis.dot(vee) < 0.0) axis = -axis;
  return angle * axis;
}

Mat3 so3_right_jacobian(const Vec3& theta) {
  const double angle = theta.norm();
  const Mat3 K = skew(theta);
  if (angle < 1e-6) {
    return Mat3::Identity() - 0.5 * K + K * K / 6.0;
  }
  const double a2 = angle * angle;
  return Mat3::Identity() - (1.0 - std::cos(angle)) / a2 * K +
         (angle - std::sin(angle)) / (a2 * angle) * K * K;
}

Mat3 so3_right_jacobian_inv(const Vec3& theta) {
  const double angle = theta.norm();
  const Mat3 K = skew(theta);
  if (angle < 1e-6) {
    return Mat3::Identity() + 0.5 * K + K * K / 12.0;
  }
  const double a2 = angle * angle;
  const double c = 1.0 / a2 - (1.0 + std::cos(angle)) / (2.0 * angle * std::sin(angle));
  return Mat3::Identity() + 0.5 * K + c * K * K;
}

Mat3 orthonormalize(const Mat3& R) {
  Eigen::JacobiSVD<Mat3> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 out = svd.matrixU() * svd.matrixV().transpose();
  if (out.determinant() < 0.0) {
    Mat3 U = svd.matrixU();
    U.col(2) *= -1.0;
    out = U * svd.matrixV().transpose();
  }
  return out;
}

bool is_rotation(const Mat3& R, double tol) {
  return (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() < tol &&
         R.determinant() > 0.0;
}

Vec3 canonical_sign(const Vec3& v) {
  int k = 0;
  v.cwiseAbs().maxCoeff(&k);
  return v(k) < 0.0 ? Vec3(-v) : v;
}

SymEigen3 sym_eigen3(const Mat3& A) {
  const Mat3 S = symmetrized(A);
  Eigen::SelfAdjointEigenSolver<Mat3> solver(S, Eigen::ComputeEigenvectors);
  const Vec3& values = solver.eigenvalues();  // ascending
  const Mat3& vectors = solver.eigenvectors();
  SymEigen3 out;
  for (int m = 0; m < 3; ++m) {
    out.lambda[m] = values(2 - m);
    out.U.col(m) = canonical_sign(vectors.col(2 - m));
  }
  return out;
}

double axis_angle_between(const Vec3& a, const Vec3& b) {
  const double c = std::abs(a.normalized().dot(b.normalized()));
  return std::acos(std::min(1.0, c));
}

}  // namespace avm
