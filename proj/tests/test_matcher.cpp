#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "avm/matcher.hpp"
#include "support/oracles.hpp"

#include <Eigen/Eigenvalues>

using namespace avm;

namespace {

PlaneFeature flat_plane(const Vec3& n, const Vec3& q, const Mat6& cov = Mat6::Zero()) {
  PlaneFeature f;
  f.normal = n;
  f.center = q;
  f.cov = cov;
  f.is_plane = true;
  return f;
}

std::vector<WorldPoint> patch_points(Rng& rng, std::size_t n, const Vec3& c, double var) {
  std::vector<WorldPoint> out;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 p = c + Vec3(rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9), 0.0) +
                   std::sqrt(var) * Vec3(rng.normal(), rng.normal(), rng.normal());
    out.push_back(WorldPoint{p, var * Mat3::Identity()});
  }
  return out;
}

Mat6 sqrt_psd(const Mat6& S) {
  Eigen::SelfAdjointEigenSolver<Mat6> es(S);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

}  // namespace

TEST_CASE("signed distance") {
  const PlaneFeature z = flat_plane(Vec3::UnitZ(), Vec3::Zero());
  CHECK(point_to_plane(Vec3::Zero(), z) == 0.0);
  CHECK(point_to_plane(Vec3(5, -2, 0.3), z) == doctest::Approx(0.3));
  CHECK(point_to_plane(Vec3(5, -2, -0.3), z) == doctest::Approx(-0.3));
  Rng rng(71);
  for (int i = 0; i < 100; ++i) {
    const Vec3 n = oracle::random_unit(rng);
    const Vec3 q(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    const Vec3 p(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    // Hesse normal form: n.x = c with c = n.q
    const double c = n.x() * q.x() + n.y() * q.y() + n.z() * q.z();
    const double hesse = n.x() * p.x() + n.y() * p.y() + n.z() * p.z() - c;
    CHECK(point_to_plane(p, flat_plane(n, q)) == doctest::Approx(hesse).epsilon(1e-12));
  }
}

TEST_CASE("residual variance limits") {
  const PlaneFeature z = flat_plane(Vec3::UnitZ(), Vec3::Zero());
  const ResidualVariance v = residual_variance(WorldPoint{Vec3(1, 2, 0), 0.01 * Mat3::Identity()}, z);
  CHECK(v.value == doctest::Approx(0.01));
  CHECK_FALSE(v.floored);
  const ResidualVariance zero = residual_variance(WorldPoint{Vec3(1, 2, 0), Mat3::Zero()}, z);
  CHECK(zero.value == kMinResidualVariance);
  CHECK(zero.floored);
}

TEST_CASE("residual variance against Monte-Carlo sampling") {
  Rng rng(72);
  const auto pts = patch_points(rng, 100, Vec3(0, 0, 1), 1e-4);
  const PlaneFeature plane = make_plane_feature(pts, Vec3(0, 0, 5), true, 0.01);
  REQUIRE(plane.is_plane);
  const WorldPoint p{Vec3(0.7, -0.4, 1.02), Vec3(4e-4, 1e-4, 2e-4).asDiagonal()};
  const double analytic = residual_variance(p, plane).value;

  const Mat6 Lnq = sqrt_psd(plane.cov);
  const Eigen::LLT<Mat3> Lp(p.cov);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    Vec6 z;
    for (int k = 0; k < 6; ++k) z(k) = rng.normal();
    const Vec6 dnq = Lnq * z;
    const Vec3 dp = Lp.matrixL() * Vec3(rng.normal(), rng.normal(), rng.normal());
    const double d = (plane.normal + dnq.head<3>()).dot(p.p + dp - plane.center - dnq.tail<3>());
    sum += d;
    sq += d * d;
  }
  const double var = sq / n - (sum / n) * (sum / n);
  CHECK(std::abs(var - analytic) / analytic < 0.10);
}

TEST_CASE("gate accepts on-plane and rejects far points") {
  const PlaneFeature z = flat_plane(Vec3::UnitZ(), Vec3::Zero());
  CHECK(gate(WorldPoint{Vec3(0.5, 0.5, 0.0), 1e-4 * Mat3::Identity()}, z).accepted);
  const WorldPoint far{Vec3(0.5, 0.5, 1.0), 0.05 * 0.05 * Mat3::Identity()};
  const GateResult g = gate(far, z);
  CHECK_FALSE(g.accepted);
  CHECK(g.distance == doctest::Approx(1.0));
  const WorldPoint edge{Vec3(0, 0, 0.149), 0.05 * 0.05 * Mat3::Identity()};
  CHECK(gate(edge, z).accepted);
  const WorldPoint over{Vec3(0, 0, 0.151), 0.05 * 0.05 * Mat3::Identity()};
  CHECK_FALSE(gate(over, z).accepted);
}

TEST_CASE("match_point against a single-plane root") {
  Rng rng(73);
  std::vector<WorldPoint> pts = patch_points(rng, 60, Vec3(1, 1, 1.0), 1e-6);
  MapConfig cfg;
  VoxelMap map = build_map(pts, cfg, Vec3(1, 1, 5));
  const WorldPoint probe{Vec3(1, 1, 1.0), 1e-6 * Mat3::Identity()};
  const auto m = match_point(probe, map);
  REQUIRE(m.has_value());
  CHECK(std::abs(m->distance) < 1e-2);
  CHECK(m->plane == map.query(probe.p).front());

  const WorldPoint off{Vec3(1, 1, 1.5), 1e-6 * Mat3::Identity()};
  CHECK_FALSE(match_point(off, map).has_value());
  CHECK_FALSE(match_point(WorldPoint{Vec3(50, 0, 0), Mat3::Identity()}, map).has_value());
}

TEST_CASE("score ordering is invariant under common variance scaling") {
  const PlaneFeature a = flat_plane(Vec3::UnitZ(), Vec3(0, 0, 0.0));
  const PlaneFeature b = flat_plane(Vec3::UnitZ(), Vec3(0, 0, 0.02));
  const Vec3 p(0, 0, 0.015);
  for (double s : {1e-4, 1e-3, 1e-2}) {
    const WorldPoint wp{p, s * Mat3::Identity()};
    const GateResult ga = gate(wp, a), gb = gate(wp, b);
    REQUIRE(ga.accepted);
    REQUIRE(gb.accepted);
    CHECK(gb.score < ga.score);
  }
}

TEST_CASE("match_scan equals per-point matching") {
  Rng rng(74);
  std::vector<WorldPoint> pts;
  for (int k = 0; k < 8; ++k) {
    const auto s = patch_points(rng, 80, Vec3(2.0 * k + 1, 1, 1), 1e-5);
    pts.insert(pts.end(), s.begin(), s.end());
  }
  const VoxelMap map = build_map(pts, MapConfig{}, Vec3(0, 0, 10));
  std::vector<WorldPoint> scan;
  for (int i = 0; i < 500; ++i) {
    scan.push_back(WorldPoint{Vec3(rng.uniform(-1, 17), rng.uniform(0, 2), 1 + 0.02 * rng.normal()),
                              1e-4 * Mat3::Identity()});
  }
  const auto ms = match_scan(scan, map);
  std::size_t j = 0;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const auto m = match_point(scan[i], map);
    if (!m) continue;
    REQUIRE(j < ms.size());
    CHECK(ms[j].index == i);
    CHECK(ms[j].plane == m->plane);
    CHECK(ms[j].distance == m->distance);
    ++j;
  }
  CHECK(j == ms.size());
  CHECK(match_scan(std::vector<WorldPoint>{}, map).empty());
}

TEST_CASE("voxel downsample keeps one return per cell") {
  std::vector<RawPoint> scan;
  for (int i = 0; i < 10; ++i) scan.push_back(RawPoint::from_cartesian(Vec3(1.0 + 0.01 * i, 0.1, 0.1)));
  scan.push_back(RawPoint::from_cartesian(Vec3(5.1, 0.1, 0.1)));
  const auto out = voxel_downsample(scan, 0.5);
  REQUIRE(out.size() == 2);
  CHECK((out[0].local() - Vec3(1.04, 0.1, 0.1)).norm() < 0.006);
  CHECK((out[1].local() - Vec3(5.1, 0.1, 0.1)).norm() < 1e-12);
  CHECK(voxel_downsample(scan, 0.0).size() == scan.size());
}
