#pragma once

#include "avm/geom.hpp"
#include "avm/random.hpp"
#include "avm/uncertainty.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace avm::sim {

/// Convex planar polygon. Corners are ordered counter-clockwise about `normal`.
struct Patch {
  std::vector<Vec3> corners;
  Vec3 normal = Vec3::UnitZ();
  Vec3 center = Vec3::Zero();
  double area = 0.0;

  /// Validates planarity and convexity; computes normal, center and area.
  static Patch from_corners(std::vector<Vec3> corners);
  bool contains(const Vec3& p, double tol = 1e-9) const;
};

/// Axis-aligned rectangle with the given outward normal axis.
Patch rect(const Vec3& center, const Vec3& u, const Vec3& v);

struct Scene {
  std::vector<Patch> patches;
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  void add(const Patch& p);
  /// Five faces of a box resting on z = floor (no bottom face).
  void add_box(const Vec3& min_corner, const Vec3& max_corner, bool with_bottom = false);
};

Scene single_wall();
/// Floor z = -1 and walls x = 9, y = 9, mutually orthogonal and disjoint.
Scene orthogonal_room();
/// Long corridor along +x with boxes of several sizes along the walls.
Scene corridor_with_boxes(double length = 130.0);
/// Ground plane with narrow vertical patches.
Scene sparse_forest(std::uint64_t seed = 7);
/// Large walled hall with pillars and boxes, for loop trajectories.
Scene hall();
Scene scene_by_name(const std::string& name);

/// Plain-text scene: one `patch x y z x y z x y z ...` line per polygon,
/// `#` comments.
void write_scene(std::ostream& os, const Scene& scene);
Scene read_scene(std::istream& is);

struct SphericalPattern {
  int azimuth_steps = 360;
  int elevation_steps = 32;
  double elevation_min = -25.0 * M_PI / 180.0;
  double elevation_max = 15.0 * M_PI / 180.0;
};

/// Non-repetitive rose-curve sampler looking along +x.
struct RosettePattern {
  int points = 10000;
  double fov = 70.4 * M_PI / 180.0;
  double petals = 5.0;
  double turns = 97.3;
};

struct ScanPattern {
  std::variant<SphericalPattern, RosettePattern> kind = SphericalPattern{};
  double min_range = 0.3;
  double max_range = 60.0;

  std::vector<Vec3> directions() const;
};

struct SimScan {
  Pose pose;                       // ground truth sensor pose
  std::vector<RawPoint> points;    // possibly corrupted measurements
  std::vector<Vec3> clean;         // noiseless sensor-frame hits
  std::vector<int> patch_ids;
};

/// First-hit ray casting; rays without a hit are omitted.
SimScan raycast(const Scene& scene, const Pose& pose, const ScanPattern& pattern);

/// Range plus tangent-plane bearing noise, seeded.
SimScan corrupt(const SimScan& scan, const SensorNoise& noise, std::uint64_t seed);

/// One corrupted copy of a single return.
RawPoint corrupt_point(const RawPoint& rp, const SensorNoise& noise, Rng& rng);

Vec3 sample_on_patch(const Patch& patch, Rng& rng);

/// Empirical covariance of [n; q] over `trials` refits of `n_points` points.
/// The noiseless layout is drawn uniformly on `patch` once per call; each
/// trial adds fresh isotropic noise of variance `point_var`. Normals share
/// the hemisphere of the patch normal. `on_trial` sees each trial's points.
Mat6 mc_plane_cov_oracle(const Patch& patch, std::size_t n_points, double point_var,
                         std::size_t trials, std::uint64_t seed,
                         const std::function<void(std::span<const Vec3>)>& on_trial = {});

enum class TrajectoryKind { kStatic, kCorridor, kLoop, kRotation };

TrajectoryKind trajectory_kind(const std::string& name);

struct TrajectoryParams {
  Vec3 origin = Vec3::Zero();
  double speed = 1.0;         // m per frame (corridor)
  double radius = 8.0;        // m (loop)
  double yaw_rate = 5.0 * M_PI / 180.0;  // rad per frame (rotation)
};

/// Ground-truth poses. Loops start and end at the same pose.
std::vector<Pose> make_trajectory(TrajectoryKind kind, std::size_t frames,
                                  const TrajectoryParams& params = {});

}  // namespace avm::sim
