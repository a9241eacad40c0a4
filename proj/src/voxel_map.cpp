#include "avm/voxel_map.hpp"

#include "avm/error.hpp"
#include "avm/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_map>

namespace avm {

std::size_t VoxelKeyHash::operator()(const VoxelKey& k) const noexcept {
  const auto ux = static_cast<std::uint64_t>(k.x);
  const auto uy = static_cast<std::uint64_t>(k.y);
  const auto uz = static_cast<std::uint64_t>(k.z);
  return static_cast<std::size_t>(
      splitmix64(ux * 73856093ull ^ uy * 19349669ull ^ uz * 83492791ull ^ (uy << 21) ^ (uz << 42)));
}

VoxelKey hash_key(const Vec3& p, double voxel_size) {
  if (!(voxel_size > 0.0)) {
    throw Error(ErrorCategory::kInvalidArgument, "voxel size must be positive");
  }
  if (!p.allFinite()) {
    throw Error(ErrorCategory::kInvalidArgument, "non-finite point coordinate");
  }
  return VoxelKey{static_cast<std::int64_t>(std::floor(p.x() / voxel_size)),
                  static_cast<std::int64_t>(std::floor(p.y() / voxel_size)),
                  static_cast<std::int64_t>(std::floor(p.z() / voxel_size))};
}

void MapConfig::validate() const {
  auto fail = [](const char* what) { throw Error(ErrorCategory::kInvalidArgument, what); };
  if (!(voxel_size > 0.0)) fail("voxel_size must be positive");
  if (max_layer < 1 || max_layer > 20) fail("max_layer must be in [1, 20]");
  if (!(plane_threshold > 0.0)) fail("plane_threshold must be positive");
  if (min_points < 3) fail("min_points must be at least 3");
  if (recent_points < 3) fail("recent_points must be at least 3");
  if (converge_points <= recent_points) fail("converge_points must exceed recent_points");
  if (!(rebuild_angle > 0.0)) fail("rebuild_angle must be positive");
  if (rebuild_strikes < 1) fail("rebuild_strikes must be positive");
  if (!(recent_min_eigen_ratio > 0.0)) fail("recent_min_eigen_ratio must be positive");
  if (max_buffer < min_points) fail("max_buffer must be at least min_points");
}

OctreeNode::OctreeNode(int layer, const Vec3& center, double half_extent, std::uint64_t seed)
    : layer_(layer), center_(center), half_(half_extent), seed_(seed) {}

bool OctreeNode::contains(const Vec3& p) const {
  return ((p - center_).array() >= -half_).all() && ((p - center_).array() < half_).all();
}

int OctreeNode::octant_of(const Vec3& p) const {
  return (p.x() >= center_.x() ? 1 : 0) | (p.y() >= center_.y() ? 2 : 0) |
         (p.z() >= center_.z() ? 4 : 0);
}

OctreeNode& OctreeNode::ensure_child(int octant) {
  auto& c = children_[octant];
  if (!c) {
    const double h = 0.5 * half_;
    const Vec3 offset((octant & 1) ? h : -h, (octant & 2) ? h : -h, (octant & 4) ? h : -h);
    c = std::make_unique<OctreeNode>(layer_ + 1, center_ + offset, h,
                                     splitmix64(seed_ ^ static_cast<std::uint64_t>(octant + 1)));
  }
  return *c;
}

void OctreeNode::for_each_plane(
    const std::function<void(const OctreeNode&, const PlaneFeature&)>& fn) const {
  if (state_ == NodeState::kPlane) {
    fn(*this, *plane_);
  } else if (state_ == NodeState::kChildren) {
    for (const auto& c : children_) {
      if (c) c->for_each_plane(fn);
    }
  }
}

VoxelMap::VoxelMap(MapConfig cfg) : cfg_(cfg) { cfg_.validate(); }

const OctreeNode* VoxelMap::root(const VoxelKey& k) const {
  auto it = roots_.find(k);
  return it == roots_.end() ? nullptr : it->second.get();
}

std::vector<VoxelKey> VoxelMap::keys() const {
  std::vector<VoxelKey> out;
  out.reserve(roots_.size());
  for (const auto& [k, _] : roots_) out.push_back(k);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<const PlaneFeature*> VoxelMap::query(const Vec3& p) const {
  std::vector<const PlaneFeature*> out;
  visit_candidates(p, [&](const PlaneFeature& f) { out.push_back(&f); });
  return out;
}

UpdateReport VoxelMap::insert(std::span<const WorldPoint> points, const Vec3& viewpoint) {
  UpdateReport report;
  report.points = points.size();

  // Group by root in first-seen order so results never depend on hash order.
  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> slot;
  std::vector<std::pair<VoxelKey, std::vector<WorldPoint>>> groups;
  for (const WorldPoint& wp : points) {
    const VoxelKey k = hash_key(wp.p, cfg_.voxel_size);
    auto [it, fresh] = slot.try_emplace(k, groups.size());
    if (fresh) groups.emplace_back(k, std::vector<WorldPoint>{});
    groups[it->second].second.push_back(wp);
  }

  for (auto& [k, batch] : groups) {
    auto it = roots_.find(k);
    if (it == roots_.end()) {
      const Vec3 center = (Vec3(static_cast<double>(k.x), static_cast<double>(k.y),
                                static_cast<double>(k.z)) +
                           Vec3::Constant(0.5)) *
                          cfg_.voxel_size;
      auto node = std::make_unique<OctreeNode>(1, center, 0.5 * cfg_.voxel_size,
                                               VoxelKeyHash{}(k));
      it = roots_.emplace(k, std::move(node)).first;
      ++report.new_roots;
    }
    update(*it->second, std::move(batch), viewpoint, report);
  }
  return report;
}

void VoxelMap::cap_buffer(OctreeNode& node, std::size_t added) {
  const auto cap = static_cast<std::size_t>(cfg_.max_buffer);
  if (node.points_.size() <= cap) {
    node.offered_ += added;
    return;
  }
  // reservoir sampling over the new arrivals with a per-node deterministic stream
  std::vector<WorldPoint> fresh(node.points_.end() - static_cast<std::ptrdiff_t>(added),
                                node.points_.end());
  node.points_.resize(node.points_.size() - added);
  for (const WorldPoint& wp : fresh) {
    ++node.offered_;
    if (node.points_.size() < cap) {
      node.points_.push_back(wp);
      continue;
    }
    const std::uint64_t j = splitmix64(node.seed_ ^ node.offered_) % node.offered_;
    if (j < cap) node.points_[j] = wp;
  }
}

void VoxelMap::settle(OctreeNode& node, std::size_t added, const Vec3& viewpoint,
                      UpdateReport& report) {
  judge(node, viewpoint, report);
  const bool buffering = node.state_ == NodeState::kPoints || node.state_ == NodeState::kExhausted ||
                         (node.state_ == NodeState::kPlane && !node.plane_->converged);
  if (buffering) cap_buffer(node, added);
}

void VoxelMap::update(OctreeNode& node, std::vector<WorldPoint>&& batch, const Vec3& viewpoint,
                      UpdateReport& report) {
  switch (node.state_) {
    case NodeState::kChildren: {
      std::array<std::vector<WorldPoint>, 8> parts;
      for (const WorldPoint& wp : batch) parts[node.octant_of(wp.p)].push_back(wp);
      for (int o = 0; o < 8; ++o) {
        if (parts[o].empty()) continue;
        update(node.ensure_child(o), std::move(parts[o]), viewpoint, report);
      }
      return;
    }
    case NodeState::kPlane:
      if (node.plane_->converged) {
        update_converged(node, batch, viewpoint, report);
        return;
      }
      [[fallthrough]];
    case NodeState::kPoints:
    case NodeState::kExhausted:
      node.points_.insert(node.points_.end(), batch.begin(), batch.end());
      settle(node, batch.size(), viewpoint, report);
      return;
  }
}

void VoxelMap::judge(OctreeNode& node, const Vec3& viewpoint, UpdateReport& report) {
  if (node.points_.size() < static_cast<std::size_t>(cfg_.min_points)) {
    node.state_ = NodeState::kPoints;
    return;
  }
  const PlaneFit fit = fit_plane(std::span<const WorldPoint>(node.points_));
  if (fit.min_eigenvalue() < cfg_.plane_threshold && !is_degenerate(fit)) {
    PlaneFeature f;
    f.fit = fit;
    f.center = fit.centroid;
    // keep the hemisphere of an existing normal, otherwise face the sensor
    f.normal = node.plane_ ? align_normal(fit, node.plane_->normal) : orient_normal(fit, viewpoint);
    f.cov = plane_cov_from_points(fit, node.points_, f.normal);
    f.is_plane = true;
    if (fit.count >= static_cast<std::size_t>(cfg_.converge_points)) {
      f.converged = true;
      node.points_.clear();
      node.points_.shrink_to_fit();
      ++report.converged;
    }
    node.plane_ = std::move(f);
    node.state_ = NodeState::kPlane;
    return;
  }
  node.plane_.reset();
  if (node.layer_ < cfg_.max_layer) {
    subdivide(node, viewpoint, report);
  } else {
    node.state_ = NodeState::kExhausted;
  }
}

void VoxelMap::subdivide(OctreeNode& node, const Vec3& viewpoint, UpdateReport& report) {
  node.state_ = NodeState::kChildren;
  std::vector<WorldPoint> pts = std::move(node.points_);
  node.points_ = {};
  std::array<std::size_t, 8> added{};
  for (const WorldPoint& wp : pts) {
    const int o = node.octant_of(wp.p);
    node.ensure_child(o).points_.push_back(wp);
    ++added[o];
  }
  for (int o = 0; o < 8; ++o) {
    if (added[o] > 0) settle(*node.children_[o], added[o], viewpoint, report);
  }
}

void VoxelMap::update_converged(OctreeNode& node, const std::vector<WorldPoint>& batch,
                                const Vec3& viewpoint, UpdateReport& report) {
  const auto k = static_cast<std::size_t>(cfg_.recent_points);
  for (const WorldPoint& wp : batch) {
    node.recent_.push_back(wp);
    if (node.recent_.size() > k) node.recent_.erase(node.recent_.begin());
  }
  if (node.recent_.size() < k) return;

  const PlaneFit fit = fit_plane(std::span<const WorldPoint>(node.recent_));
  const bool judgeable =
      !is_degenerate(fit) && fit.eig.lambda[1] >= cfg_.recent_min_eigen_ratio * fit.eig.lambda[2];
  if (!judgeable) return;
  const double angle = axis_angle_between(node.plane_->normal, fit.min_eigenvector());
  if (angle <= cfg_.rebuild_angle) {
    node.strikes_ = 0;
    return;
  }
  if (++node.strikes_ < cfg_.rebuild_strikes) return;

  // the region changed: rebuild this node from the recent points
  node.points_ = std::move(node.recent_);
  node.recent_ = {};
  node.offered_ = node.points_.size();
  node.strikes_ = 0;
  node.plane_.reset();
  node.state_ = NodeState::kPoints;
  for (auto& c : node.children_) c.reset();
  ++report.rebuilt;
  judge(node, viewpoint, report);
}

MapStats VoxelMap::stats() const {
  MapStats s;
  s.roots = roots_.size();
  std::function<void(const OctreeNode&)> walk = [&](const OctreeNode& n) {
    ++s.nodes;
    s.max_layer = std::max<std::size_t>(s.max_layer, static_cast<std::size_t>(n.layer()));
    s.buffered_points += n.points().size();
    s.recent_points += n.recent_.size();
    if (n.state() == NodeState::kExhausted) ++s.exhausted_nodes;
    if (n.state() == NodeState::kPlane) {
      ++s.planes;
      if (n.plane()->converged) ++s.converged_planes;
      ++s.planes_by_size[cfg_.layer_size(n.layer())];
    }
    for (int o = 0; o < 8; ++o) {
      if (const OctreeNode* c = n.child(o)) walk(*c);
    }
  };
  for (const auto& [_, node] : roots_) walk(*node);
  return s;
}

void VoxelMap::dump(std::ostream& os) const {
  char line[512];
  for (const VoxelKey& k : keys()) {
    roots_.at(k)->for_each_plane([&](const OctreeNode& n, const PlaneFeature& f) {
      std::snprintf(line, sizeof line,
                    "%d %.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g %d\n", n.layer(),
                    n.center().x(), n.center().y(), n.center().z(), f.normal.x(), f.normal.y(),
                    f.normal.z(), f.center.x(), f.center.y(), f.center.z(),
                    f.fit.min_eigenvalue(), f.normal_cov().trace(), f.converged ? 1 : 0);
      os << line;
    });
  }
}

VoxelMap build_map(std::span<const WorldPoint> points, const MapConfig& cfg,
                   const Vec3& viewpoint) {
  VoxelMap map(cfg);
  map.insert(points, viewpoint);
  return map;
}

}  // namespace avm
