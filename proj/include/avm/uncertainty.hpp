#pragma once

#include "avm/geom.hpp"

#include <Eigen/Core>

namespace avm {

/// LiDAR measurement noise. Bearing noise lives in the 2-D tangent plane of
/// the bearing; the isotropic case is sigma_bearing^2 * I2.
struct SensorNoise {
  double sigma_range = 0.02;                         // m
  double sigma_bearing = 0.05 * M_PI / 180.0;        // rad

  Eigen::Matrix2d bearing_cov() const {
    return sigma_bearing * sigma_bearing * Eigen::Matrix2d::Identity();
  }
  double range_var() const { return sigma_range * sigma_range; }

  void validate() const;
};

/// One return expressed as bearing and depth.
struct RawPoint {
  Vec3 bearing = Vec3::UnitX();
  double depth = 0.0;

  Vec3 local() const { return depth * bearing; }

  /// Builds (bearing, depth) from a Cartesian sensor-frame point. Throws on
  /// zero range.
  static RawPoint from_cartesian(const Vec3& p);
};

struct WorldPoint {
  Vec3 p = Vec3::Zero();
  Mat3 cov = Mat3::Zero();
};

/// Orthonormal basis of the tangent plane at a unit vector. Columns are built
/// from the coordinate axis least aligned with the input.
Mat32 tangent_basis(const Vec3& bearing);

/// Sensor-frame covariance of a return from ranging and bearing noise.
Mat3 local_point_cov(const RawPoint& rp, double range_var,
                     const Eigen::Matrix2d& bearing_cov);
Mat3 local_point_cov(const RawPoint& rp, const SensorNoise& noise);

/// World-frame point and covariance through an uncertain pose.
///
/// With the right-perturbation convention R * exp(dtheta) the rotational
/// contribution is R [p]x cov_R [p]x^T R^T, which reduces to [p]x cov_R [p]x^T
/// at R = I.
WorldPoint world_point_cov(const RawPoint& rp, const Mat3& local_cov, const Pose& pose);

}  // namespace avm
