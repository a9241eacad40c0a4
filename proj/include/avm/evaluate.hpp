#pragma once

#include "avm/io.hpp"

#include <vector>

namespace avm {

struct EvalOptions {
  double align_fraction = 0.2;
  std::size_t min_align_poses = 5;
  /// Nearest-neighbour ICP over the aligned window instead of the closed
  /// form on known correspondences.
  bool icp = false;
  int icp_iterations = 50;
  /// Stamp tolerance (s) when the sequences have different lengths.
  double stamp_tolerance = 0.01;
};

struct EvalResult {
  double rmse = 0.0;
  std::vector<double> errors;  // per associated frame, m
  Mat3 R = Mat3::Identity();   // estimate -> ground truth
  Vec3 t = Vec3::Zero();
  std::size_t aligned = 0;     // poses in the alignment window
};

/// Least-squares rigid transform taking `src` onto `dst` (no scale).
void rigid_align(const std::vector<Vec3>& src, const std::vector<Vec3>& dst, Mat3& R, Vec3& t);

/// Absolute translational RMSE after aligning the estimate to the ground
/// truth on the leading fraction of positions.
EvalResult evaluate(const std::vector<PoseRecord>& estimate,
                    const std::vector<PoseRecord>& truth, const EvalOptions& opts = {});

}  // namespace avm
