#include "avm/evaluate.hpp"

#include "avm/error.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>

namespace avm {
namespace {

Eigen::Matrix3Xd stack(const std::vector<Vec3>& v) {
  Eigen::Matrix3Xd m(3, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = v[i];
  return m;
}

// Pairs of (estimate index, truth index).
std::vector<std::pair<std::size_t, std::size_t>> associate(const std::vector<PoseRecord>& est,
                                                           const std::vector<PoseRecord>& gt,
                                                           double tol) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (est.size() == gt.size()) {
    for (std::size_t i = 0; i < est.size(); ++i) out.emplace_back(i, i);
    return out;
  }
  for (const auto* seq : {&est, &gt}) {
    for (const PoseRecord& r : *seq) {
      if (!r.stamp) {
        throw Error(ErrorCategory::kInvalidArgument,
                    "sequences differ in length and lack timestamps for association");
      }
    }
  }
  std::size_t j = 0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double s = *est[i].stamp;
    while (j + 1 < gt.size() && std::abs(*gt[j + 1].stamp - s) <= std::abs(*gt[j].stamp - s)) ++j;
    if (j < gt.size() && std::abs(*gt[j].stamp - s) <= tol) out.emplace_back(i, j);
  }
  return out;
}

}  // namespace

void rigid_align(const std::vector<Vec3>& src, const std::vector<Vec3>& dst, Mat3& R, Vec3& t) {
  const Eigen::Matrix4d T = Eigen::umeyama(stack(src), stack(dst), false);
  R = T.topLeftCorner<3, 3>();
  t = T.topRightCorner<3, 1>();
}

EvalResult evaluate(const std::vector<PoseRecord>& estimate, const std::vector<PoseRecord>& truth,
                    const EvalOptions& opts) {
  const auto pairs = associate(estimate, truth, opts.stamp_tolerance);
  const std::size_t window =
      static_cast<std::size_t>(std::floor(opts.align_fraction * static_cast<double>(pairs.size())));
  if (window < opts.min_align_poses) {
    throw Error(ErrorCategory::kInvalidArgument,
                "alignment underdetermined: " + std::to_string(window) +
                    " poses in the alignment window, need " +
                    std::to_string(opts.min_align_poses));
  }
  std::vector<Vec3> src, dst;
  for (std::size_t k = 0; k < window; ++k) {
    src.push_back(estimate[pairs[k].first].t);
    dst.push_back(truth[pairs[k].second].t);
  }

  EvalResult res;
  res.aligned = window;
  rigid_align(src, dst, res.R, res.t);
  if (opts.icp) {
    // nearest-neighbour refinement seeded with the corresponding-pair alignment
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opts.icp_iterations; ++it) {
      std::vector<Vec3> nn(window);
      double err = 0.0;
      for (std::size_t k = 0; k < window; ++k) {
        const Vec3 p = res.R * src[k] + res.t;
        double best = std::numeric_limits<double>::infinity();
        for (const Vec3& q : dst) {
          const double d = (q - p).squaredNorm();
          if (d < best) {
            best = d;
            nn[k] = q;
          }
        }
        err += best;
      }
      rigid_align(src, nn, res.R, res.t);
      if (prev - err <= 1e-12 * std::max(1.0, prev)) break;
      prev = err;
    }
  }

  double sum = 0.0;
  for (const auto& [i, j] : pairs) {
    const double e = (res.R * estimate[i].t + res.t - truth[j].t).norm();
    res.errors.push_back(e);
    sum += e * e;
  }
  res.rmse = std::sqrt(sum / static_cast<double>(pairs.size()));
  return res;
}

}  // namespace avm
