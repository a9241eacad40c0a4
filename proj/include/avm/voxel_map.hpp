#pragma once

#include "avm/geom.hpp"
#include "avm/plane.hpp"
#include "avm/uncertainty.hpp"

#include <absl/container/flat_hash_map.h>

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace avm {

struct VoxelKey {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;

  friend bool operator==(const VoxelKey&, const VoxelKey&) = default;
  friend auto operator<=>(const VoxelKey&, const VoxelKey&) = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept;
};

/// Root lattice key, floor(p / voxel_size) per axis. Throws on non-finite input.
VoxelKey hash_key(const Vec3& p, double voxel_size);

struct MapConfig {
  double voxel_size = 2.0;                 // root edge length, m
  int max_layer = 3;                       // layer 1 is the root
  double plane_threshold = 0.01;           // lambda3 bound, m^2
  int min_points = 10;                     // below this a node stays undecided
  int converge_points = 50;
  int recent_points = 10;
  double rebuild_angle = 10.0 * M_PI / 180.0;
  int rebuild_strikes = 3;
  // recent-point refits must satisfy lambda2 >= ratio * lambda3 to be judged
  double recent_min_eigen_ratio = 9.0;
  int max_buffer = 1000;
  bool query_neighbors = false;

  void validate() const;
  double layer_size(int layer) const { return voxel_size / static_cast<double>(1 << (layer - 1)); }
};

enum class NodeState { kPoints, kPlane, kChildren, kExhausted };

class OctreeNode {
 public:
  OctreeNode(int layer, const Vec3& center, double half_extent, std::uint64_t seed);

  int layer() const { return layer_; }
  const Vec3& center() const { return center_; }
  double half_extent() const { return half_; }
  NodeState state() const { return state_; }
  const std::vector<WorldPoint>& points() const { return points_; }
  const std::optional<PlaneFeature>& plane() const { return plane_; }
  const OctreeNode* child(int octant) const { return children_[octant].get(); }
  bool contains(const Vec3& p) const;

  void for_each_plane(const std::function<void(const OctreeNode&, const PlaneFeature&)>& fn) const;
  template <typename Fn>
  void visit_planes(Fn&& fn) const {
    if (state_ == NodeState::kPlane) {
      fn(*plane_);
    } else if (state_ == NodeState::kChildren) {
      for (const auto& c : children_) {
        if (c) c->visit_planes(fn);
      }
    }
  }

 private:
  friend class VoxelMap;

  int octant_of(const Vec3& p) const;
  OctreeNode& ensure_child(int octant);

  int layer_;
  Vec3 center_;
  double half_;
  std::uint64_t seed_;
  NodeState state_ = NodeState::kPoints;
  std::vector<WorldPoint> points_;
  std::uint64_t offered_ = 0;  // points ever offered to the buffer
  std::optional<PlaneFeature> plane_;
  std::array<std::unique_ptr<OctreeNode>, 8> children_;
  std::vector<WorldPoint> recent_;
  int strikes_ = 0;
};

struct MapStats {
  std::map<double, std::size_t> planes_by_size;  // edge length (m) -> count
  std::size_t roots = 0;
  std::size_t nodes = 0;
  std::size_t planes = 0;
  std::size_t converged_planes = 0;
  std::size_t buffered_points = 0;
  std::size_t recent_points = 0;
  std::size_t max_layer = 0;
  std::size_t exhausted_nodes = 0;
};

struct UpdateReport {
  std::size_t points = 0;
  std::size_t new_roots = 0;
  std::size_t converged = 0;  // nodes that converged during this call
  std::size_t rebuilt = 0;
};

/// Hash table of octree roots holding plane features.
///
/// Writes (build, insert) need exclusive access. Reads (query, stats, dump)
/// may run concurrently with each other.
class VoxelMap {
 public:
  explicit VoxelMap(MapConfig cfg = {});

  const MapConfig& config() const { return cfg_; }

  /// Inserts a batch of world points. Unpopulated roots are constructed
  /// coarse-to-fine; populated nodes are updated. `viewpoint` orients new
  /// plane normals.
  UpdateReport insert(std::span<const WorldPoint> points, const Vec3& viewpoint = Vec3::Zero());

  std::vector<const PlaneFeature*> query(const Vec3& p) const;

  template <typename Fn>
  void visit_candidates(const Vec3& p, Fn&& fn) const {
    const VoxelKey k = hash_key(p, cfg_.voxel_size);
    visit_root(k, fn);
    if (cfg_.query_neighbors) {
      static constexpr std::int64_t kOffsets[6][3] = {
          {-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
      for (const auto& o : kOffsets) visit_root(VoxelKey{k.x + o[0], k.y + o[1], k.z + o[2]}, fn);
    }
  }

  const OctreeNode* root(const VoxelKey& k) const;
  std::size_t root_count() const { return roots_.size(); }
  /// Root keys in ascending order.
  std::vector<VoxelKey> keys() const;

  MapStats stats() const;

  /// One line per plane, roots in key order:
  /// layer cx cy cz nx ny nz qx qy qz lambda3 trace_nn converged
  void dump(std::ostream& os) const;

 private:
  template <typename Fn>
  void visit_root(const VoxelKey& k, Fn& fn) const {
    auto it = roots_.find(k);
    if (it != roots_.end()) it->second->visit_planes(fn);
  }

  void judge(OctreeNode& node, const Vec3& viewpoint, UpdateReport& report);
  void update(OctreeNode& node, std::vector<WorldPoint>&& batch, const Vec3& viewpoint,
              UpdateReport& report);
  /// Trims the buffer to max_buffer; the last `added` points are new arrivals.
  void cap_buffer(OctreeNode& node, std::size_t added);
  /// judge, then cap_buffer when the node keeps buffering.
  void settle(OctreeNode& node, std::size_t added, const Vec3& viewpoint, UpdateReport& report);
  void subdivide(OctreeNode& node, const Vec3& viewpoint, UpdateReport& report);
  void update_converged(OctreeNode& node, const std::vector<WorldPoint>& batch,
                        const Vec3& viewpoint, UpdateReport& report);

  MapConfig cfg_;
  absl::flat_hash_map<VoxelKey, std::unique_ptr<OctreeNode>, VoxelKeyHash> roots_;
};

/// Builds a map from one batch (coarse-to-fine construction).
VoxelMap build_map(std::span<const WorldPoint> points, const MapConfig& cfg,
                   const Vec3& viewpoint = Vec3::Zero());

}  // namespace avm
