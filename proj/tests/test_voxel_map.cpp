#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "avm/error.hpp"
#include "avm/voxel_map.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <map>
#include <sstream>

using namespace avm;

namespace {

WorldPoint wp(const Vec3& p, double var = 1e-6) { return WorldPoint{p, var * Mat3::Identity()}; }

std::vector<WorldPoint> square(Rng& rng, std::size_t n, const Vec3& origin, const Vec3& u,
                               const Vec3& v) {
  std::vector<WorldPoint> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(wp(origin + rng.uniform() * u + rng.uniform() * v));
  return out;
}

}  // namespace

TEST_CASE("hash key uses floor division") {
  CHECK(hash_key(Vec3(0.1, 0.2, 0.3), 1.0) == VoxelKey{0, 0, 0});
  CHECK(hash_key(Vec3(-0.1, 0, 0), 1.0) == VoxelKey{-1, 0, 0});
  CHECK(hash_key(Vec3(-2.0, 3.99, -4.01), 2.0) == VoxelKey{-1, 1, -3});
  CHECK_THROWS_AS(hash_key(Vec3(NAN, 0, 0), 1.0), Error);
  CHECK_THROWS_AS(hash_key(Vec3(INFINITY, 0, 0), 1.0), Error);
}

TEST_CASE("hash key grouping matches brute force") {
  Rng rng(51);
  std::vector<Vec3> pts;
  for (int i = 0; i < 10000; ++i) pts.emplace_back(rng.uniform(-7, 7), rng.uniform(-7, 7), rng.uniform(-7, 7));
  std::map<VoxelKey, std::vector<int>> by_key;
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) by_key[hash_key(pts[i], 1.5)].push_back(i);
  // Spot-check pairs: same key iff same floored coordinates.
  for (int trial = 0; trial < 20000; ++trial) {
    const auto a = rng.below(pts.size()), b = rng.below(pts.size());
    bool same_floor = true;
    for (int k = 0; k < 3; ++k) same_floor = same_floor && std::floor(pts[a](k) / 1.5) == std::floor(pts[b](k) / 1.5);
    CHECK((hash_key(pts[a], 1.5) == hash_key(pts[b], 1.5)) == same_floor);
  }
  std::size_t total = 0;
  for (const auto& [k, idx] : by_key) {
    total += idx.size();
    for (int i : idx) {
      for (int a = 0; a < 3; ++a) {
        const double lo = static_cast<double>(a == 0 ? k.x : a == 1 ? k.y : k.z) * 1.5;
        CHECK(pts[i](a) >= lo);
        CHECK(pts[i](a) < lo + 1.5);
      }
    }
  }
  CHECK(total == pts.size());
}

TEST_CASE("single plane root gives one layer-1 plane") {
  Rng rng(52);
  const auto pts = square(rng, 100, Vec3(0.1, 0.1, 1.0), Vec3(1.8, 0, 0), Vec3(0, 1.8, 0));
  const VoxelMap map = build_map(pts, MapConfig{}, Vec3(1, 1, 5));
  const MapStats s = map.stats();
  CHECK(s.roots == 1);
  CHECK(s.planes == 1);
  CHECK(s.planes_by_size == std::map<double, std::size_t>{{2.0, 1}});
  const auto q = map.query(Vec3(1, 1, 1));
  REQUIRE(q.size() == 1);
  CHECK((q[0]->normal - Vec3::UnitZ()).norm() < 1e-3);
  CHECK(map.query(Vec3(10, 10, 10)).empty());
}

TEST_CASE("two perpendicular patches subdivide once") {
  Rng rng(53);
  auto pts = square(rng, 200, Vec3(0.05, 0.05, 0.5), Vec3(0.9, 0, 0), Vec3(0, 0.9, 0));
  const auto wall = square(rng, 200, Vec3(1.5, 1.05, 1.05), Vec3(0, 0.9, 0), Vec3(0, 0, 0.9));
  pts.insert(pts.end(), wall.begin(), wall.end());
  const VoxelMap map = build_map(pts, MapConfig{}, Vec3(1, 1, 1));
  const MapStats s = map.stats();
  CHECK(s.roots == 1);
  CHECK(s.planes_by_size == std::map<double, std::size_t>{{1.0, 2}});
  CHECK(map.root(VoxelKey{0, 0, 0})->state() == NodeState::kChildren);
}

TEST_CASE("random fill has no planes and reaches the deepest layer") {
  Rng rng(54);
  std::vector<WorldPoint> pts;
  for (int i = 0; i < 32000; ++i) pts.push_back(wp(Vec3(rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2))));
  MapConfig cfg;
  cfg.max_layer = 3;
  const VoxelMap map = build_map(pts, cfg);
  const MapStats s = map.stats();
  CHECK(s.planes == 0);
  CHECK(s.max_layer == 3);
  CHECK(s.exhausted_nodes == 64);
}

TEST_CASE("buffered points stay inside their node") {
  Rng rng(55);
  std::vector<WorldPoint> pts;
  for (int i = 0; i < 3000; ++i) pts.push_back(wp(Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3))));
  const VoxelMap map = build_map(pts, MapConfig{});
  std::size_t buffered = 0;
  std::function<void(const OctreeNode&)> walk = [&](const OctreeNode& n) {
    CHECK(n.layer() <= map.config().max_layer);
    if (n.state() == NodeState::kPlane) CHECK(n.plane().has_value());
    if (n.state() == NodeState::kChildren) CHECK_FALSE(n.plane().has_value());
    for (const WorldPoint& p : n.points()) CHECK(n.contains(p.p));
    buffered += n.points().size();
    for (int o = 0; o < 8; ++o)
      if (n.child(o)) walk(*n.child(o));
  };
  for (const VoxelKey& k : map.keys()) walk(*map.root(k));
  CHECK(buffered == pts.size());
}

TEST_CASE("convergence after the 50th point") {
  Rng rng(56);
  const auto pts = square(rng, 60, Vec3(0.1, 0.1, 1.0), Vec3(1.8, 0, 0), Vec3(0, 1.8, 0));
  VoxelMap map;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    map.insert(std::span(&pts[i], 1), Vec3(1, 1, 5));
    const OctreeNode* root = map.root(VoxelKey{0, 0, 0});
    if (i + 1 < 10) {
      CHECK(root->state() == NodeState::kPoints);
    } else if (i + 1 < 50) {
      REQUIRE(root->state() == NodeState::kPlane);
      CHECK_FALSE(root->plane()->converged);
    } else {
      REQUIRE(root->state() == NodeState::kPlane);
      CHECK(root->plane()->converged);
      CHECK(root->points().empty());
    }
  }
}

TEST_CASE("converged plane ignores coplanar points and rebuilds on change") {
  Rng rng(57);
  VoxelMap map;
  map.insert(square(rng, 100, Vec3(0.1, 0.1, 1.0), Vec3(1.8, 0, 0), Vec3(0, 1.8, 0)), Vec3(1, 1, 5));
  const OctreeNode* root = map.root(VoxelKey{0, 0, 0});
  REQUIRE(root->plane()->converged);
  const PlaneFeature before = *root->plane();

  UpdateReport r = map.insert(square(rng, 10, Vec3(0.1, 0.1, 1.0), Vec3(1.8, 0, 0), Vec3(0, 1.8, 0)), Vec3(1, 1, 5));
  CHECK(r.rebuilt == 0);
  CHECK(root->plane()->normal == before.normal);
  CHECK(root->plane()->center == before.center);
  CHECK(root->plane()->cov == before.cov);

  std::size_t rebuilt = 0;
  for (int batch = 0; batch < 3; ++batch) {
    r = map.insert(square(rng, 10, Vec3(1.0, 0.1, 0.1), Vec3(0, 1.8, 0), Vec3(0, 0, 1.8)), Vec3(5, 1, 1));
    rebuilt += r.rebuilt;
    if (batch < 2) CHECK(rebuilt == 0);
  }
  CHECK(rebuilt == 1);
  REQUIRE(root->state() == NodeState::kPlane);
  CHECK(axis_angle_between(root->plane()->normal, Vec3::UnitX()) < 5.0 * M_PI / 180.0);
}

TEST_CASE("point buffer is capped") {
  Rng rng(58);
  MapConfig cfg;
  cfg.max_layer = 1;
  cfg.max_buffer = 100;
  std::vector<WorldPoint> pts;
  for (int i = 0; i < 500; ++i) pts.push_back(wp(Vec3(rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2))));
  VoxelMap map(cfg);
  for (std::size_t i = 0; i < pts.size(); i += 50) map.insert(std::span(pts).subspan(i, 50));
  CHECK(map.root(VoxelKey{0, 0, 0})->points().size() == 100);
  CHECK(map.root(VoxelKey{0, 0, 0})->state() == NodeState::kExhausted);
}

TEST_CASE("query equals linear scan on random maps") {
  Rng rng(59);
  for (int m = 0; m < 5; ++m) {
    std::vector<WorldPoint> pts;
    for (int patch = 0; patch < 60; ++patch) {
      const Vec3 o(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-3, 3));
      const auto s = square(rng, 80, o, oracle::random_unit(rng) * 1.5, oracle::random_unit(rng) * 1.5);
      pts.insert(pts.end(), s.begin(), s.end());
    }
    const VoxelMap map = build_map(pts, MapConfig{});
    for (int i = 0; i < 500; ++i) {
      const Vec3 p(rng.uniform(-12, 12), rng.uniform(-12, 12), rng.uniform(-5, 5));
      auto a = map.query(p);
      auto b = oracle::linear_scan_query(map, p);
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      CHECK(a == b);
    }
  }
}

TEST_CASE("neighbour query adds face-adjacent roots") {
  Rng rng(60);
  std::vector<WorldPoint> pts = square(rng, 50, Vec3(0.1, 0.1, 1.0), Vec3(1.8, 0, 0), Vec3(0, 1.8, 0));
  const auto other = square(rng, 50, Vec3(2.1, 0.1, 1.0), Vec3(1.8, 0, 0), Vec3(0, 1.8, 0));
  pts.insert(pts.end(), other.begin(), other.end());
  MapConfig cfg;
  CHECK(build_map(pts, cfg).query(Vec3(1, 1, 1)).size() == 1);
  cfg.query_neighbors = true;
  CHECK(build_map(pts, cfg).query(Vec3(1, 1, 1)).size() == 2);
}

TEST_CASE("maps are deterministic and dump is stable") {
  Rng rng(61);
  std::vector<WorldPoint> pts;
  for (int patch = 0; patch < 30; ++patch) {
    const auto s = square(rng, 70, Vec3(rng.uniform(-6, 6), rng.uniform(-6, 6), 0), Vec3(1.2, 0.3, 0), Vec3(0, 1.1, 0.2));
    pts.insert(pts.end(), s.begin(), s.end());
  }
  std::ostringstream a, b;
  build_map(pts, MapConfig{}).dump(a);
  build_map(pts, MapConfig{}).dump(b);
  CHECK(a.str() == b.str());
  CHECK_FALSE(a.str().empty());
  std::istringstream lines(a.str());
  std::string line;
  while (std::getline(lines, line)) {
    std::istringstream ls(line);
    int fields = 0;
    std::string tok;
    while (ls >> tok) ++fields;
    CHECK(fields == 13);
  }
}

TEST_CASE("empty map stats are zero") {
  const MapStats s = VoxelMap().stats();
  CHECK(s.roots == 0);
  CHECK(s.planes == 0);
  CHECK(s.nodes == 0);
  CHECK(s.planes_by_size.empty());
}

TEST_CASE("config validation") {
  MapConfig cfg;
  cfg.voxel_size = 0;
  CHECK_THROWS_AS(VoxelMap{cfg}, Error);
}
