#include "avm/simulator.hpp"

#include "avm/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace avm::sim {

Patch Patch::from_corners(std::vector<Vec3> corners) {
  if (corners.size() < 3) {
    throw Error(ErrorCategory::kInvalidArgument, "a patch needs at least 3 corners");
  }
  // Newell's method: robust normal and twice the area
  Vec3 newell = Vec3::Zero();
  const std::size_t n = corners.size();
  for (std::size_t i = 0; i < n; ++i) newell += corners[i].cross(corners[(i + 1) % n]);
  const double twice_area = newell.norm();
  double scale = 0.0;
  for (const Vec3& c : corners) scale = std::max(scale, (c - corners[0]).norm());
  if (!(twice_area > 1e-12 * std::max(1.0, scale * scale))) {
    throw Error(ErrorCategory::kInvalidArgument, "patch has zero area");
  }
  Patch p;
  p.normal = newell / twice_area;
  p.area = 0.5 * twice_area;
  for (const Vec3& c : corners) {
    if (std::abs(p.normal.dot(c - corners[0])) > 1e-9 * std::max(1.0, scale)) {
      throw Error(ErrorCategory::kInvalidArgument, "patch corners are not coplanar");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 e0 = corners[(i + 1) % n] - corners[i];
    const Vec3 e1 = corners[(i + 2) % n] - corners[(i + 1) % n];
    if (e0.cross(e1).dot(p.normal) < -1e-9 * std::max(1.0, scale * scale)) {
      throw Error(ErrorCategory::kInvalidArgument, "patch is not convex");
    }
  }
  // area-weighted centroid over a triangle fan
  Vec3 acc = Vec3::Zero();
  double total = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double a = 0.5 * (corners[i] - corners[0]).cross(corners[i + 1] - corners[0]).norm();
    acc += a * (corners[0] + corners[i] + corners[i + 1]) / 3.0;
    total += a;
  }
  p.center = acc / total;
  p.corners = std::move(corners);
  return p;
}

bool Patch::contains(const Vec3& p, double tol) const {
  const std::size_t n = corners.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 e = corners[(i + 1) % n] - corners[i];
    if (e.cross(p - corners[i]).dot(normal) < -tol * e.norm()) return false;
  }
  return true;
}

Patch rect(const Vec3& center, const Vec3& u, const Vec3& v) {
  return Patch::from_corners({center - u - v, center + u - v, center + u + v, center - u + v});
}

void Scene::add(const Patch& p) {
  if (patches.empty()) {
    lo = hi = p.corners.front();
  }
  for (const Vec3& c : p.corners) {
    lo = lo.cwiseMin(c);
    hi = hi.cwiseMax(c);
  }
  patches.push_back(p);
}

void Scene::add_box(const Vec3& a, const Vec3& b, bool with_bottom) {
  const Vec3 c = 0.5 * (a + b);
  const Vec3 h = 0.5 * (b - a);
  const Vec3 ex(h.x(), 0, 0), ey(0, h.y(), 0), ez(0, 0, h.z());
  // outward normals: u x v points away from the box center
  add(rect(c + ex, ey, ez));
  add(rect(c - ex, ez, ey));
  add(rect(c + ey, ez, ex));
  add(rect(c - ey, ex, ez));
  add(rect(c + ez, ex, ey));
  if (with_bottom) add(rect(c - ez, ey, ex));
}

Scene single_wall() {
  Scene s;
  s.add(rect(Vec3(10, 0, 0), Vec3(0, 0, 5), Vec3(0, 10, 0)));
  return s;
}

Scene orthogonal_room() {
  // each face sits mid-way through one band of 2 m roots, so no root sees two faces
  Scene s;
  s.add(rect(Vec3(0.0, 0.0, -1.0), Vec3(7.0, 0.0, 0.0), Vec3(0.0, 7.0, 0.0)));
  s.add(rect(Vec3(9.0, 0.0, 2.0), Vec3(0.0, 7.0, 0.0), Vec3(0.0, 0.0, 2.0)));
  s.add(rect(Vec3(0.0, 9.0, 2.0), Vec3(0.0, 0.0, 2.0), Vec3(7.0, 0.0, 0.0)));
  return s;
}

Scene corridor_with_boxes(double length) {
  Scene s;
  const double x0 = -10.0, x1 = length;
  const double y0 = -3.0, y1 = 3.0, z0 = -1.5, z1 = 2.5;
  s.add_box(Vec3(x0, y0, z0), Vec3(x1, y1, z1), true);
  // boxes of varying size along both walls
  int i = 0;
  for (double x = -6.0; x < x1 - 4.0; x += 4.5, ++i) {
    const double size = 0.6 + 0.3 * (i % 4);
    const double depth = 0.5 + 0.25 * ((i + 1) % 3);
    const bool left = (i % 2) == 0;
    const double ya = left ? y1 - depth : y0;
    const double yb = left ? y1 : y0 + depth;
    s.add_box(Vec3(x, ya, z0), Vec3(x + size, yb, z0 + size + 0.2 * (i % 3)));
    if (i % 3 == 1) {
      // a smaller box on the floor near the middle
      s.add_box(Vec3(x + 1.5, -0.4, z0), Vec3(x + 1.9, 0.0, z0 + 0.4));
    }
  }
  return s;
}

Scene sparse_forest(std::uint64_t seed) {
  Scene s;
  s.add(rect(Vec3(0, 0, -1.5), Vec3(40, 0, 0), Vec3(0, 40, 0)));
  Rng rng(seed);
  for (int i = 0; i < 120; ++i) {
    const double x = rng.uniform(-38.0, 38.0);
    const double y = rng.uniform(-38.0, 38.0);
    if (std::hypot(x, y) < 3.0) continue;
    const double w = rng.uniform(0.15, 0.3);
    const double yaw = rng.uniform(0.0, M_PI);
    const Vec3 c(x, y, 0.5);
    const Vec3 u(w * std::cos(yaw), w * std::sin(yaw), 0.0);
    const Vec3 u2(-u.y(), u.x(), 0.0);
    s.add(rect(c, u, Vec3(0, 0, 2.0)));
    s.add(rect(c, u2, Vec3(0, 0, 2.0)));
  }
  return s;
}

Scene hall() {
  Scene s;
  s.add_box(Vec3(-15.0, -8.0, -1.5), Vec3(15.0, 22.0, 3.5), true);
  for (int ix = -1; ix <= 1; ++ix) {
    for (int iy = 0; iy <= 2; ++iy) {
      const double x = 9.0 * ix, y = 1.0 + 7.0 * iy;
      if (ix == 0 && iy == 1) continue;
      s.add_box(Vec3(x - 0.4, y - 0.4, -1.5), Vec3(x + 0.4, y + 0.4, 3.5));
    }
  }
  s.add_box(Vec3(-2.0, 6.0, -1.5), Vec3(-0.8, 7.5, -0.5));
  s.add_box(Vec3(2.5, 8.5, -1.5), Vec3(3.5, 9.0, 0.2));
  s.add_box(Vec3(-12.0, 16.0, -1.5), Vec3(-10.0, 17.0, 0.5));
  return s;
}

Scene scene_by_name(const std::string& name) {
  if (name == "wall") return single_wall();
  if (name == "room") return orthogonal_room();
  if (name == "corridor") return corridor_with_boxes();
  if (name == "forest") return sparse_forest();
  if (name == "hall") return hall();
  throw Error(ErrorCategory::kUsage, "unknown scene '" + name + "'");
}

void write_scene(std::ostream& os, const Scene& scene) {
  os << "# scene v1: patch followed by convex corner list (x y z ...)\n";
  os.precision(17);
  for (const Patch& p : scene.patches) {
    os << "patch";
    for (const Vec3& c : p.corners) os << ' ' << c.x() << ' ' << c.y() << ' ' << c.z();
    os << '\n';
  }
}

Scene read_scene(std::istream& is) {
  Scene s;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag != "patch") {
      throw Error(ErrorCategory::kParse, "scene line " + std::to_string(lineno) +
                                             ": expected 'patch', got '" + tag + "'");
    }
    std::vector<double> v;
    double x;
    while (ss >> x) v.push_back(x);
    if (!ss.eof() || v.size() % 3 != 0 || v.size() < 9) {
      throw Error(ErrorCategory::kParse,
                  "scene line " + std::to_string(lineno) + ": need 3n coordinates, n >= 3");
    }
    std::vector<Vec3> corners;
    for (std::size_t i = 0; i < v.size(); i += 3) corners.emplace_back(v[i], v[i + 1], v[i + 2]);
    s.add(Patch::from_corners(std::move(corners)));
  }
  return s;
}

std::vector<Vec3> ScanPattern::directions() const {
  std::vector<Vec3> out;
  if (const auto* sp = std::get_if<SphericalPattern>(&kind)) {
    out.reserve(static_cast<std::size_t>(sp->azimuth_steps) * sp->elevation_steps);
    for (int j = 0; j < sp->elevation_steps; ++j) {
      const double e = sp->elevation_steps == 1
                           ? 0.5 * (sp->elevation_min + sp->elevation_max)
                           : sp->elevation_min + (sp->elevation_max - sp->elevation_min) * j /
                                                     (sp->elevation_steps - 1);
      for (int i = 0; i < sp->azimuth_steps; ++i) {
        const double a = 2.0 * M_PI * i / sp->azimuth_steps;
        out.emplace_back(std::cos(e) * std::cos(a), std::cos(e) * std::sin(a), std::sin(e));
      }
    }
  } else {
    const auto& rp = std::get<RosettePattern>(kind);
    out.reserve(static_cast<std::size_t>(rp.points));
    for (int i = 0; i < rp.points; ++i) {
      const double s = static_cast<double>(i) / rp.points;
      const double phi = 2.0 * M_PI * rp.turns * s;
      const double alpha = 0.5 * rp.fov * std::sin(rp.petals * phi);
      out.emplace_back(std::cos(alpha), std::sin(alpha) * std::cos(phi),
                       std::sin(alpha) * std::sin(phi));
    }
  }
  return out;
}

SimScan raycast(const Scene& scene, const Pose& pose, const ScanPattern& pattern) {
  struct Candidate {
    const Patch* patch;
    int id;
    double offset;  // n . corner0
  };
  // patches out of range cannot produce hits
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < scene.patches.size(); ++i) {
    const Patch& p = scene.patches[i];
    double radius = 0.0;
    for (const Vec3& c : p.corners) radius = std::max(radius, (c - p.center).norm());
    if ((p.center - pose.t).norm() - radius > pattern.max_range) continue;
    candidates.push_back({&p, static_cast<int>(i), p.normal.dot(p.corners[0])});
  }

  SimScan scan;
  scan.pose = pose;
  for (const Vec3& d : pattern.directions()) {
    const Vec3 dir = pose.R * d;
    double best = std::numeric_limits<double>::infinity();
    int best_id = -1;
    for (const Candidate& c : candidates) {
      const double denom = c.patch->normal.dot(dir);
      if (std::abs(denom) < 1e-12) continue;
      const double s = (c.offset - c.patch->normal.dot(pose.t)) / denom;
      if (s < pattern.min_range || s > pattern.max_range || s >= best) continue;
      if (!c.patch->contains(pose.t + s * dir)) continue;
      best = s;
      best_id = c.id;
    }
    if (best_id < 0) continue;
    scan.points.push_back(RawPoint{d, best});
    scan.clean.push_back(best * d);
    scan.patch_ids.push_back(best_id);
  }
  return scan;
}

RawPoint corrupt_point(const RawPoint& rp, const SensorNoise& noise, Rng& rng) {
  const double dd = rng.normal(0.0, noise.sigma_range);
  const Eigen::Vector2d dw(rng.normal(0.0, noise.sigma_bearing),
                           rng.normal(0.0, noise.sigma_bearing));
  RawPoint out;
  out.depth = std::max(0.0, rp.depth + dd);
  out.bearing = dw.isZero(0) ? rp.bearing
                             : Vec3((so3_exp(tangent_basis(rp.bearing) * dw) * rp.bearing).normalized());
  return out;
}

SimScan corrupt(const SimScan& scan, const SensorNoise& noise, std::uint64_t seed) {
  SimScan out = scan;
  Rng rng(seed);
  for (RawPoint& rp : out.points) rp = corrupt_point(rp, noise, rng);
  return out;
}

Vec3 sample_on_patch(const Patch& patch, Rng& rng) {
  const auto& c = patch.corners;
  // pick a fan triangle by area, then a uniform point inside it
  double target = rng.uniform() * patch.area;
  std::size_t tri = 1;
  for (; tri + 2 < c.size(); ++tri) {
    const double a = 0.5 * (c[tri] - c[0]).cross(c[tri + 1] - c[0]).norm();
    if (target < a) break;
    target -= a;
  }
  double u = rng.uniform(), v = rng.uniform();
  if (u + v > 1.0) {
    u = 1.0 - u;
    v = 1.0 - v;
  }
  return c[0] + u * (c[tri] - c[0]) + v * (c[tri + 1] - c[0]);
}

Mat6 mc_plane_cov_oracle(const Patch& patch, std::size_t n_points, double point_var,
                         std::size_t trials, std::uint64_t seed,
                         const std::function<void(std::span<const Vec3>)>& on_trial) {
  if (trials < 1000) {
    throw Error(ErrorCategory::kInvalidArgument, "the plane covariance oracle needs >= 1000 trials");
  }
  if (n_points < 3) {
    throw Error(ErrorCategory::kInsufficientPoints, "the plane covariance oracle needs >= 3 points");
  }
  Rng layout_rng(Rng::derive(seed, 0));
  std::vector<Vec3> layout(n_points);
  for (Vec3& p : layout) p = sample_on_patch(patch, layout_rng);

  const double sd = std::sqrt(point_var);
  std::vector<Vec3> pts(n_points);
  Vec6 mean = Vec6::Zero();
  Mat6 second = Mat6::Zero();
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(Rng::derive(seed, t + 1));
    Vec3 q = Vec3::Zero();
    for (std::size_t i = 0; i < n_points; ++i) {
      pts[i] = layout[i] + Vec3(rng.normal(0.0, sd), rng.normal(0.0, sd), rng.normal(0.0, sd));
      q += pts[i];
    }
    q /= static_cast<double>(n_points);
    Mat3 A = Mat3::Zero();
    for (const Vec3& p : pts) A += (p - q) * (p - q).transpose();
    A /= static_cast<double>(n_points);
    Eigen::SelfAdjointEigenSolver<Mat3> es(A);
    Vec3 n = es.eigenvectors().col(0);
    if (n.dot(patch.normal) < 0.0) n = -n;
    Vec6 x;
    x << n, q;
    // Welford update
    const Vec6 delta = x - mean;
    mean += delta / static_cast<double>(t + 1);
    second += delta * (x - mean).transpose();
    if (on_trial) on_trial(pts);
  }
  Mat6 cov = second / static_cast<double>(trials - 1);
  return 0.5 * (cov + cov.transpose());
}

TrajectoryKind trajectory_kind(const std::string& name) {
  if (name == "static") return TrajectoryKind::kStatic;
  if (name == "corridor") return TrajectoryKind::kCorridor;
  if (name == "loop") return TrajectoryKind::kLoop;
  if (name == "rotation") return TrajectoryKind::kRotation;
  throw Error(ErrorCategory::kUsage, "unknown trajectory kind '" + name + "'");
}

std::vector<Pose> make_trajectory(TrajectoryKind kind, std::size_t frames,
                                  const TrajectoryParams& params) {
  std::vector<Pose> out(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    Pose& p = out[i];
    p.t = params.origin;
    const double fi = static_cast<double>(i);
    switch (kind) {
      case TrajectoryKind::kStatic:
        break;
      case TrajectoryKind::kCorridor:
        p.t += Vec3(fi * params.speed, 0.0, 0.0);
        break;
      case TrajectoryKind::kLoop: {
        const double phi = frames > 1 ? 2.0 * M_PI * fi / static_cast<double>(frames - 1) : 0.0;
        p.t += Vec3(params.radius * std::sin(phi), params.radius * (1.0 - std::cos(phi)), 0.0);
        p.R = so3_exp(Vec3(0.0, 0.0, phi));
        break;
      }
      case TrajectoryKind::kRotation:
        p.R = so3_exp(Vec3(0.0, 0.0, fi * params.yaw_rate));
        break;
    }
  }
  return out;
}

}  // namespace avm::sim
