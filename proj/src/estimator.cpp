#include "avm/estimator.hpp"

#include "avm/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace avm {

Pose State::pose() const {
  Pose p;
  p.R = R;
  p.t = t;
  p.cov_R = symmetrized(P.topLeftCorner<3, 3>());
  p.cov_t = symmetrized(P.bottomRightCorner<3, 3>());
  return p;
}

State boxplus(const State& x, const Vec6& delta) {
  State out = x;
  out.R = orthonormalize(x.R * so3_exp(delta.head<3>()));
  out.t = x.t + delta.tail<3>();
  return out;
}

Vec6 boxminus(const State& a, const State& b) {
  Vec6 d;
  d.head<3>() = so3_log(b.R.transpose() * a.R);
  d.tail<3>() = a.t - b.t;
  return d;
}

Mat6 EstimatorConfig::process_noise() const {
  Mat6 Q = Mat6::Zero();
  Q.diagonal().head<3>().setConstant(process_rot_var);
  Q.diagonal().tail<3>().setConstant(process_trans_var);
  return Q;
}

void EstimatorConfig::validate() const {
  auto fail = [](const char* what) { throw Error(ErrorCategory::kInvalidArgument, what); };
  if (!(process_rot_var > 0.0) || !(process_trans_var > 0.0)) fail("process noise must be positive");
  if (max_iter < 1) fail("max_iter must be at least 1");
  if (!(eps_iter > 0.0)) fail("eps_iter must be positive");
  if (!(max_condition > 1.0)) fail("max_condition must exceed 1");
}

State propagate_cv(std::span<const State> history, const EstimatorConfig& cfg,
                   std::optional<double> stamp) {
  State prior;
  if (!history.empty()) prior = history.back();
  prior.P = symmetrized(prior.P + cfg.process_noise());
  if (history.size() < 2) {
    if (stamp) prior.stamp = *stamp;
    return prior;
  }
  const State& a = history[history.size() - 2];
  const State& b = history.back();
  Mat3 dR = a.R.transpose() * b.R;
  Vec3 dt = a.R.transpose() * (b.t - a.t);
  double next_stamp = b.stamp + (b.stamp - a.stamp);
  if (stamp) {
    next_stamp = *stamp;
    const double span = b.stamp - a.stamp;
    if (span > 0.0) {
      // rotation scaled on SO(3), translation linearly
      const double ratio = (*stamp - b.stamp) / span;
      dR = so3_exp(ratio * so3_log(dR));
      dt = ratio * dt;
    }
  }
  prior.R = orthonormalize(b.R * dR);
  prior.t = b.t + b.R * dt;
  prior.stamp = next_stamp;
  return prior;
}

std::vector<ScanPoint> make_scan_points(std::span<const RawPoint> raw, const SensorNoise& noise) {
  std::vector<ScanPoint> out;
  out.reserve(raw.size());
  for (const RawPoint& rp : raw) out.push_back(ScanPoint{rp, local_point_cov(rp, noise)});
  return out;
}

std::vector<WorldPoint> to_world(std::span<const ScanPoint> scan, const State& state) {
  const Pose pose = state.pose();
  std::vector<WorldPoint> out;
  out.reserve(scan.size());
  for (const ScanPoint& sp : scan) out.push_back(world_point_cov(sp.raw, sp.local_cov, pose));
  return out;
}

Observation linearize(const ScanPoint& sp, const PlaneFeature& plane, const State& iterate) {
  const Vec3 lp = sp.raw.local();
  const Vec3 wp = iterate.R * lp + iterate.t;
  const Vec3& n = plane.normal;
  Observation o;
  o.z = n.dot(wp - plane.center);
  o.H.head<3>() = -n.transpose() * iterate.R * skew(lp);
  o.H.tail<3>() = n.transpose();

  Row6 J_nq;
  J_nq.head<3>() = (wp - plane.center).transpose();
  J_nq.tail<3>() = -n.transpose();
  const Vec3 Rn = iterate.R.transpose() * n;
  const double r = (J_nq * plane.cov * J_nq.transpose()).value() + Rn.dot(sp.local_cov * Rn);
  o.R = (r < kMinResidualVariance || !std::isfinite(r)) ? kMinResidualVariance : r;
  return o;
}

namespace {

struct Normal {
  Mat6 info = Mat6::Zero();
  Vec6 grad = Vec6::Zero();
  double cost = 0.0;
};

// Normal equations of the MAP cost around `x`.
Normal assemble(const State& x, const State& prior, const Mat6& prior_info,
                const std::vector<Observation>& obs) {
  Normal ne;
  const Vec6 e = boxminus(x, prior);
  Mat6 A = Mat6::Identity();
  A.topLeftCorner<3, 3>() = so3_right_jacobian_inv(e.head<3>());
  ne.info = A.transpose() * prior_info * A;
  ne.grad = A.transpose() * prior_info * e;
  ne.cost = e.dot(prior_info * e);
  // fixed-order accumulation keeps results reproducible
  for (const Observation& o : obs) {
    const double w = 1.0 / o.R;
    ne.info.noalias() += w * o.H.transpose() * o.H;
    ne.grad.noalias() += (w * o.z) * o.H.transpose();
    ne.cost += w * o.z * o.z;
  }
  ne.info = symmetrized(ne.info);
  return ne;
}

}  // namespace

IekfResult iekf_solve(const State& prior, const ObservationModel& model,
                      const EstimatorConfig& cfg) {
  Eigen::LDLT<Mat6> prior_ldlt(symmetrized(prior.P));
  if (prior_ldlt.info() != Eigen::Success || !prior_ldlt.isPositive() ||
      prior_ldlt.vectorD().minCoeff() <= 0.0) {
    throw Error(ErrorCategory::kInvalidArgument, "prior covariance must be positive definite");
  }
  const Mat6 prior_info = symmetrized(prior_ldlt.solve(Mat6::Identity()));

  IekfResult res;
  State x = prior;
  std::vector<Observation> obs;
  model(x, obs);
  Normal ne = assemble(x, prior, prior_info, obs);
  res.cost_prior = ne.cost;

  for (int it = 0; it < cfg.max_iter; ++it) {
    Eigen::SelfAdjointEigenSolver<Mat6> es(ne.info, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0);
    const double hi = es.eigenvalues()(5);
    if (!(lo > 0.0) || hi / lo > cfg.max_condition) {
      std::ostringstream msg;
      msg << "normal matrix condition " << (lo > 0.0 ? hi / lo : INFINITY) << " exceeds limit";
      throw Error(ErrorCategory::kDegenerateGeometry, msg.str());
    }
    const Vec6 step = -ne.info.ldlt().solve(ne.grad);

    bool accepted = false;
    Vec6 trial_step = step;
    for (int halving = 0; halving < 4; ++halving) {
      const State candidate = boxplus(x, trial_step);
      std::vector<Observation> cand_obs;
      model(candidate, cand_obs);
      Normal cand = assemble(candidate, prior, prior_info, cand_obs);
      if (cand.cost <= ne.cost) {
        x = candidate;
        obs = std::move(cand_obs);
        ne = std::move(cand);
        accepted = true;
        break;
      }
      trial_step *= 0.5;
    }
    if (!accepted) break;
    ++res.iterations;
    if (trial_step.norm() < cfg.eps_iter) {
      res.converged = true;
      break;
    }
  }

  res.cost_final = ne.cost;
  res.observations = obs.size();
  res.posterior = x;
  res.posterior.stamp = prior.stamp;
  res.posterior.P = symmetrized(ne.info.ldlt().solve(Mat6::Identity()));
  return res;
}

ObservationModel map_observation_model(std::span<const ScanPoint> scan, const VoxelMap& map,
                                       const State& prior, const EstimatorConfig& cfg,
                                       std::vector<Match>& matches) {
  return [scan, &map, prior, rematch = cfg.rematch, &matches](const State& x,
                                                               std::vector<Observation>& out) {
    if (rematch) {
      State at = x;
      at.P = prior.P;  // gate with the prior uncertainty
      matches = match_scan(to_world(scan, at), map);
    }
    out.clear();
    out.reserve(matches.size());
    for (const Match& m : matches) out.push_back(linearize(scan[m.index], *m.plane, x));
  };
}

UpdateOutcome iekf_update(const State& prior, std::span<const ScanPoint> scan,
                          const VoxelMap& map, const EstimatorConfig& cfg) {
  UpdateOutcome out;
  out.matches = match_scan(to_world(scan, prior), map);
  ObservationModel model = map_observation_model(scan, map, prior, cfg, out.matches);
  out.result = iekf_solve(prior, model, cfg);
  return out;
}

}  // namespace avm
