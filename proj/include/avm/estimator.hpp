#pragma once

#include "avm/geom.hpp"
#include "avm/matcher.hpp"
#include "avm/uncertainty.hpp"
#include "avm/voxel_map.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace avm {

/// Pose estimate with a 6x6 tangent covariance ordered [dtheta; dt].
/// R (+) d = (R exp(dtheta), t + dt).
struct State {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();
  Mat6 P = Mat6::Zero();
  double stamp = 0.0;

  /// Pose with the rotation and translation blocks of P (cross terms dropped).
  Pose pose() const;
};

State boxplus(const State& x, const Vec6& delta);
/// a (-) b = (log(Rb^T Ra), ta - tb).
Vec6 boxminus(const State& a, const State& b);

struct EstimatorConfig {
  double process_rot_var = 1e-4;    // (0.01 rad)^2 per axis per frame
  double process_trans_var = 1e-2;  // (0.1 m)^2 per axis per frame
  int max_iter = 5;
  double eps_iter = 1e-6;
  bool rematch = false;
  double max_condition = 1e12;

  Mat6 process_noise() const;
  void validate() const;
};

/// Constant-velocity prior: repeats the last inter-frame motion. With a
/// target stamp and stamped history the motion is scaled by the time ratio.
/// Fewer than two states give an identity-motion prior.
State propagate_cv(std::span<const State> history, const EstimatorConfig& cfg,
                   std::optional<double> stamp = std::nullopt);

/// Scan return with its sensor-frame covariance.
struct ScanPoint {
  RawPoint raw;
  Mat3 local_cov = Mat3::Zero();
};

std::vector<ScanPoint> make_scan_points(std::span<const RawPoint> raw, const SensorNoise& noise);

/// World points at `state`, covariances through the pose blocks of state.P.
std::vector<WorldPoint> to_world(std::span<const ScanPoint> scan, const State& state);

/// z = H dx + v linearized at an iterate.
struct Observation {
  double z = 0.0;
  Row6 H = Row6::Zero();
  double R = 1.0;
};

Observation linearize(const ScanPoint& sp, const PlaneFeature& plane, const State& iterate);

/// Fills the observations at an iterate.
using ObservationModel = std::function<void(const State&, std::vector<Observation>&)>;

struct IekfResult {
  State posterior;
  int iterations = 0;
  double cost_prior = 0.0;
  double cost_final = 0.0;
  bool converged = false;
  std::size_t observations = 0;
};

/// Iterated Gauss-Newton on the MAP cost
///   (x (-) prior)^T P^-1 (x (-) prior) + sum z_i(x)^2 / R_i.
/// Steps that raise the cost are halved; the accepted iterate never costs
/// more than the prior. Throws kDegenerateGeometry when the normal matrix
/// condition number exceeds cfg.max_condition.
IekfResult iekf_solve(const State& prior, const ObservationModel& model,
                      const EstimatorConfig& cfg);

/// Observation model over map matches. With cfg.rematch the association is
/// redone at every iterate; `matches` always holds the latest association.
ObservationModel map_observation_model(std::span<const ScanPoint> scan, const VoxelMap& map,
                                       const State& prior, const EstimatorConfig& cfg,
                                       std::vector<Match>& matches);

struct UpdateOutcome {
  IekfResult result;
  std::vector<Match> matches;
};

/// Matches the scan at the prior and runs the iterated update.
UpdateOutcome iekf_update(const State& prior, std::span<const ScanPoint> scan,
                          const VoxelMap& map, const EstimatorConfig& cfg);

}  // namespace avm
