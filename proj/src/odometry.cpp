#include "avm/odometry.hpp"

#include "avm/error.hpp"

#include <chrono>
#include <cstdio>

namespace avm {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

void OdometryConfig::validate() const {
  noise.validate();
  map.validate();
  estimator.validate();
  if (!(downsample_leaf >= 0.0)) {
    throw Error(ErrorCategory::kInvalidArgument, "downsample_leaf must be non-negative");
  }
}

std::string FrameDiagnostics::to_line() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "frame=%zu stamp=%.6f points=%zu used=%zu matches=%zu iterations=%d "
                "cost_before=%.9g cost_after=%.9g flagged=%d downsample_ms=%.3f match_ms=%.3f "
                "update_ms=%.3f insert_ms=%.3f total_ms=%.3f",
                frame, stamp, points_in, points_used, matches, iterations, cost_before,
                cost_after, flagged ? 1 : 0, times.downsample_ms, times.match_ms,
                times.update_ms, times.insert_ms, times.total_ms);
  std::string line = buf;
  if (flagged) line += " reason=\"" + flag_reason + "\"";
  return line;
}

Odometry::Odometry(OdometryConfig cfg) : cfg_(cfg), map_(cfg.map) { cfg_.validate(); }

FrameDiagnostics Odometry::process(std::span<const RawPoint> scan, double stamp) {
  const auto t_total = Clock::now();
  FrameDiagnostics diag;
  diag.frame = history_.size();
  diag.stamp = stamp;
  diag.points_in = scan.size();

  auto t0 = Clock::now();
  const std::vector<RawPoint> reduced = voxel_downsample(scan, cfg_.downsample_leaf);
  const std::vector<ScanPoint> points = make_scan_points(reduced, cfg_.noise);
  diag.points_used = points.size();
  diag.times.downsample_ms = ms_since(t0);

  if (history_.empty()) {
    State origin;
    origin.stamp = stamp;
    t0 = Clock::now();
    map_.insert(to_world(points, origin), origin.t);
    diag.times.insert_ms = ms_since(t0);
    history_.push_back(origin);
    diag.times.total_ms = ms_since(t_total);
    return diag;
  }

  const State prior = propagate_cv(history_, cfg_.estimator, stamp);

  t0 = Clock::now();
  std::vector<Match> matches = match_scan(to_world(points, prior), map_);
  diag.times.match_ms = ms_since(t0);

  t0 = Clock::now();
  State posterior;
  try {
    const ObservationModel model =
        map_observation_model(points, map_, prior, cfg_.estimator, matches);
    const IekfResult res = iekf_solve(prior, model, cfg_.estimator);
    posterior = res.posterior;
    diag.iterations = res.iterations;
    diag.cost_before = res.cost_prior;
    diag.cost_after = res.cost_final;
  } catch (const Error& e) {
    if (e.category() != ErrorCategory::kDegenerateGeometry) throw;
    diag.flagged = true;
    diag.flag_reason = e.what();
    posterior = prior;
  }
  diag.matches = matches.size();
  diag.times.update_ms = ms_since(t0);

  if (!diag.flagged) {
    t0 = Clock::now();
    map_.insert(to_world(points, posterior), posterior.t);
    diag.times.insert_ms = ms_since(t0);
  }
  history_.push_back(posterior);
  diag.times.total_ms = ms_since(t_total);
  return diag;
}

}  // namespace avm
