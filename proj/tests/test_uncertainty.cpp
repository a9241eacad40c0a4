#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>

#include "avm/error.hpp"
#include "avm/uncertainty.hpp"
#include "support/oracles.hpp"

using namespace avm;

TEST_CASE("tangent basis is orthonormal and orthogonal to the bearing") {
  for (const Vec3& w : {Vec3(Vec3::UnitZ()), Vec3(Vec3::UnitX())}) {
    const Mat32 N = tangent_basis(w);
    CHECK((N.transpose() * N - Eigen::Matrix2d::Identity()).norm() < 1e-9);
    CHECK((N.transpose() * w).norm() < 1e-9);
  }
  CHECK(tangent_basis(Vec3::UnitZ()).col(0).z() == 0.0);
  CHECK(tangent_basis(Vec3::UnitZ()).col(1).z() == 0.0);
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 w = oracle::random_unit(rng);
    const Mat32 N = tangent_basis(w);
    CHECK((N.transpose() * N - Eigen::Matrix2d::Identity()).norm() < 1e-9);
    CHECK((N.transpose() * w).norm() < 1e-9);
    CHECK(tangent_basis(w) == N);
  }
  CHECK_THROWS_AS(tangent_basis(Vec3(1.0 + 1e-5, 0, 0)), Error);
  CHECK_NOTHROW(tangent_basis(Vec3(1.0 + 1e-7, 0, 0)));
}

TEST_CASE("local covariance limits") {
  const RawPoint rp{Vec3(1, 2, 2).normalized(), 10.0};
  SensorNoise noise;
  noise.sigma_bearing = 0.0;
  const Mat3 range_only = noise.range_var() * rp.bearing * rp.bearing.transpose();
  CHECK((local_point_cov(rp, noise) - range_only).norm() < 1e-15);

  SensorNoise def;
  const RawPoint at_origin{rp.bearing, 0.0};
  CHECK((local_point_cov(at_origin, def) - def.range_var() * rp.bearing * rp.bearing.transpose())
            .norm() < 1e-15);

  const Mat3 S = local_point_cov(rp, def);
  CHECK((S - S.transpose()).norm() == 0.0);
  const Vec3 ev = Eigen::SelfAdjointEigenSolver<Mat3>(S).eigenvalues();
  CHECK(ev.minCoeff() > 0.0);
}

TEST_CASE("local covariance against Monte-Carlo returns") {
  SensorNoise noise;
  noise.sigma_range = 0.02;
  noise.sigma_bearing = 0.001;
  const RawPoint rp{Vec3::UnitZ(), 10.0};
  const Mat3 closed = local_point_cov(rp, noise);
  const Mat3 mc = oracle::mc_local_point_cov(rp, noise, 100000, 21);
  CHECK((mc - closed).norm() / closed.norm() < 0.05);
}

TEST_CASE("world covariance limits") {
  Rng rng(12);
  const RawPoint rp{oracle::random_unit(rng), 12.0};
  const Mat3 L = local_point_cov(rp, SensorNoise{});
  Pose pose;
  WorldPoint wp = world_point_cov(rp, L, pose);
  CHECK((wp.cov - L).norm() < 1e-18);
  CHECK((wp.p - rp.local()).norm() < 1e-15);

  pose.R = oracle::random_rotation(rng);
  pose.t = Vec3(1, 2, 3);
  pose.cov_t = Vec3(0.1, 0.2, 0.3).asDiagonal();
  wp = world_point_cov(rp, Mat3::Zero(), pose);
  CHECK((wp.cov - pose.cov_t).norm() < 1e-15);
  CHECK((wp.p - (pose.R * rp.local() + pose.t)).norm() < 1e-12);
}

TEST_CASE("world covariance against pose Monte-Carlo") {
  Rng rng(13);
  Pose pose;
  pose.R = oracle::random_rotation(rng);
  pose.t = Vec3(3, -1, 2);
  pose.cov_R = 1e-4 * Mat3::Identity();
  pose.cov_t = 4e-4 * Mat3::Identity();
  SensorNoise noise;
  const RawPoint rp{oracle::random_unit(rng), 30.0};
  const WorldPoint wp = world_point_cov(rp, local_point_cov(rp, noise), pose);
  const Mat3 mc = oracle::mc_world_point_cov(rp, noise, pose, 100000, 31);
  CHECK((mc - wp.cov).norm() / wp.cov.norm() < 0.10);
}

TEST_CASE("world covariance grows with depth and commutes with rotation") {
  Rng rng(14);
  Pose pose;
  pose.R = oracle::random_rotation(rng);
  pose.cov_R = 1e-4 * Mat3::Identity();
  const Vec3 w = oracle::random_unit(rng);
  SensorNoise noise;
  double prev = -1.0;
  for (double d = 0.5; d < 60.0; d += 2.5) {
    const RawPoint rp{w, d};
    const double tr = world_point_cov(rp, local_point_cov(rp, noise), pose).cov.trace();
    CHECK(tr >= prev);
    prev = tr;
  }

  const Mat3 Q = oracle::random_rotation(rng);
  const RawPoint rp{w, 20.0};
  pose.cov_t = Vec3(1e-4, 2e-4, 3e-4).asDiagonal();
  const Mat3 base = world_point_cov(rp, local_point_cov(rp, noise), pose).cov;
  Pose rotated = pose;
  rotated.R = Q * pose.R;
  rotated.t = Q * pose.t;
  rotated.cov_t = Q * pose.cov_t * Q.transpose();
  const Mat3 moved = world_point_cov(rp, local_point_cov(rp, noise), rotated).cov;
  CHECK((moved - Q * base * Q.transpose()).norm() < 1e-9 * base.norm() + 1e-18);
}

TEST_CASE("raw point from cartesian") {
  const RawPoint rp = RawPoint::from_cartesian(Vec3(0, 3, 4));
  CHECK(rp.depth == doctest::Approx(5.0));
  CHECK((rp.bearing - Vec3(0, 0.6, 0.8)).norm() < 1e-15);
  CHECK_THROWS_AS(RawPoint::from_cartesian(Vec3::Zero()), Error);
}

TEST_CASE("noise validation") {
  SensorNoise n;
  n.sigma_range = -1;
  CHECK_THROWS_AS(n.validate(), Error);
}
