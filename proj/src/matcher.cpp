#include "avm/matcher.hpp"

#include <cmath>
#include <unordered_map>

namespace avm {

double point_to_plane(const Vec3& p, const PlaneFeature& plane) {
  return plane.normal.dot(p - plane.center);
}

ResidualVariance residual_variance(const WorldPoint& p, const PlaneFeature& plane) {
  Row6 J_nq;
  J_nq.head<3>() = (p.p - plane.center).transpose();
  J_nq.tail<3>() = -plane.normal.transpose();
  const double v = (J_nq * plane.cov * J_nq.transpose()).value() +
                   plane.normal.dot(p.cov * plane.normal);
  ResidualVariance out;
  if (v < kMinResidualVariance || !std::isfinite(v)) {
    out.value = kMinResidualVariance;
    out.floored = true;
  } else {
    out.value = v;
  }
  return out;
}

GateResult gate(const WorldPoint& p, const PlaneFeature& plane, double sigmas) {
  GateResult g;
  g.distance = point_to_plane(p.p, plane);
  const ResidualVariance rv = residual_variance(p, plane);
  g.variance = rv.value;
  g.floored = rv.floored;
  g.accepted = std::abs(g.distance) <= sigmas * std::sqrt(g.variance);
  g.score = g.distance * g.distance / g.variance + std::log(g.variance);
  return g;
}

std::optional<Match> match_point(const WorldPoint& p, const VoxelMap& map) {
  std::optional<Match> best;
  double best_score = 0.0;
  map.visit_candidates(p.p, [&](const PlaneFeature& plane) {
    const GateResult g = gate(p, plane);
    if (!g.accepted) return;
    // strict comparison: the first candidate in traversal order wins ties
    if (!best || g.score < best_score) {
      best_score = g.score;
      best = Match{0, p, &plane, g.distance, g.variance, g.floored};
    }
  });
  return best;
}

std::vector<Match> match_scan(std::span<const WorldPoint> points, const VoxelMap& map) {
  std::vector<Match> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (auto m = match_point(points[i], map)) {
      m->index = i;
      out.push_back(*m);
    }
  }
  return out;
}

}  // namespace avm

namespace avm {

std::vector<RawPoint> voxel_downsample(std::span<const RawPoint> scan, double leaf) {
  if (!(leaf > 0.0)) return {scan.begin(), scan.end()};
  struct Cell {
    Vec3 sum = Vec3::Zero();
    std::vector<std::size_t> members;
  };
  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> slot;
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const Vec3 p = scan[i].local();
    auto [it, fresh] = slot.try_emplace(hash_key(p, leaf), cells.size());
    if (fresh) cells.emplace_back();
    Cell& c = cells[it->second];
    c.sum += p;
    c.members.push_back(i);
  }
  std::vector<RawPoint> out;
  out.reserve(cells.size());
  for (const Cell& c : cells) {
    const Vec3 mean = c.sum / static_cast<double>(c.members.size());
    std::size_t best = c.members.front();
    double best_d = (scan[best].local() - mean).squaredNorm();
    for (std::size_t i : c.members) {
      const double d = (scan[i].local() - mean).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    out.push_back(scan[best]);
  }
  return out;
}

}  // namespace avm
