#include "avm/bench.hpp"

#include "avm/pipeline.hpp"
#include "avm/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

namespace avm {
namespace {

using Clock = std::chrono::steady_clock;

// Populated roots fill a near-cubic block of keys starting at the origin.
Vec3 root_corner(std::size_t i, std::size_t side, double V) {
  const std::size_t x = i % side, y = (i / side) % side, z = i / (side * side);
  return Vec3(static_cast<double>(x), static_cast<double>(y), static_cast<double>(z)) * V;
}

VoxelMap make_bench_map(std::size_t roots, const QueryBenchOptions& opts, const MapConfig& cfg,
                        std::size_t& side) {
  side = static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(roots)) - 1e-9));
  VoxelMap map(cfg);
  if (opts.empty) return map;
  Rng rng(Rng::derive(opts.seed, roots));
  const double V = cfg.voxel_size;
  std::vector<WorldPoint> pts;
  pts.reserve(roots * opts.points_per_root);
  for (std::size_t i = 0; i < roots; ++i) {
    const Vec3 c = root_corner(i, side, V);
    // A tilted plane through the root centre, sampled inside the cube.
    const Vec3 n = Vec3(rng.normal() * 0.2, rng.normal() * 0.2, 1.0).normalized();
    const Vec3 u = n.unitOrthogonal(), v = n.cross(u);
    for (std::size_t k = 0; k < opts.points_per_root; ++k) {
      const Vec3 p = c + Vec3::Constant(0.5 * V) + 0.3 * V * (rng.uniform(-1, 1) * u + rng.uniform(-1, 1) * v);
      pts.push_back(WorldPoint{p, Mat3::Identity() * 1e-6});
    }
  }
  map.insert(pts, Vec3(-1.0, -1.0, -1.0) * V);
  return map;
}

}  // namespace

std::vector<QueryScalingPoint> bench_query_scaling(const QueryBenchOptions& opts,
                                                   const MapConfig& cfg) {
  struct Case {
    VoxelMap map;
    std::vector<Vec3> probes;
    double best = std::numeric_limits<double>::infinity();
    std::size_t sink = 0;
  };
  std::vector<Case> cases;
  for (std::size_t roots : opts.root_counts) {
    std::size_t side = 0;
    Case c{make_bench_map(roots, opts, cfg, side), std::vector<Vec3>(opts.queries)};
    Rng rng(Rng::derive(opts.seed ^ 0x9e37u, roots));
    for (Vec3& p : c.probes) {
      const Vec3 corner = root_corner(rng.below(roots), side, cfg.voxel_size);
      p = corner + Vec3(rng.uniform(), rng.uniform(), rng.uniform()) * cfg.voxel_size;
    }
    cases.push_back(std::move(c));
  }
  // rounds interleave the map sizes so machine-wide slowdowns hit all of them
  const auto start = Clock::now();
  const auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
  for (int r = 0; r < opts.repeats || elapsed() < opts.min_seconds; ++r) {
    for (Case& c : cases) {
      std::size_t sink = 0;
      const auto t0 = Clock::now();
      for (const Vec3& p : c.probes) sink += c.map.query(p).size();
      const double ns = std::chrono::duration<double, std::nano>(Clock::now() - t0).count();
      c.best = std::min(c.best, ns / static_cast<double>(c.probes.size()));
      c.sink = sink;
    }
  }
  std::vector<QueryScalingPoint> out;
  for (const Case& c : cases) {
    QueryScalingPoint pt;
    pt.roots = c.map.root_count();
    pt.planes = c.sink;
    pt.mean_ns = c.best;
    out.push_back(pt);
  }
  return out;
}

StageReport summarize_stages(const std::vector<FrameDiagnostics>& frames) {
  StageReport rep;
  rep.frames = frames.size();
  using Get = double (*)(const StageTimes&);
  const std::pair<const char*, Get> stages[] = {
      {"downsample", [](const StageTimes& t) { return t.downsample_ms; }},
      {"match", [](const StageTimes& t) { return t.match_ms; }},
      {"update", [](const StageTimes& t) { return t.update_ms; }},
      {"insert", [](const StageTimes& t) { return t.insert_ms; }},
      {"total", [](const StageTimes& t) { return t.total_ms; }},
  };
  for (const auto& [name, get] : stages) {
    StageStats s;
    s.name = name;
    double sum = 0.0, sq = 0.0;
    for (const FrameDiagnostics& f : frames) {
      const double v = get(f.times);
      sum += v;
      sq += v * v;
      s.max_ms = std::max(s.max_ms, v);
    }
    const double n = std::max<double>(1.0, static_cast<double>(frames.size()));
    s.mean_ms = sum / n;
    s.std_ms = std::sqrt(std::max(0.0, sq / n - s.mean_ms * s.mean_ms));
    rep.stages.push_back(s);
  }
  for (const FrameDiagnostics& f : frames) {
    rep.stage_sum_ms +=
        f.times.downsample_ms + f.times.match_ms + f.times.update_ms + f.times.insert_ms;
    rep.total_ms += f.times.total_ms;
  }
  if (!frames.empty()) {
    rep.stage_sum_ms /= static_cast<double>(frames.size());
    rep.total_ms /= static_cast<double>(frames.size());
  }
  return rep;
}

StageReport bench_stages(const OdometryConfig& cfg, std::size_t frames, std::uint64_t seed) {
  const sim::Scene scene = sim::corridor_with_boxes();
  sim::TrajectoryParams params;
  params.speed = 0.1;
  const auto poses = sim::make_trajectory(sim::TrajectoryKind::kCorridor, frames, params);
  const auto scans = simulate(scene, poses, pattern_by_name("spherical"), cfg.noise, seed);
  Odometry odom(cfg);
  std::vector<FrameDiagnostics> diags;
  for (std::size_t i = 0; i < scans.size(); ++i) {
    diags.push_back(odom.process(scans[i].points, 0.1 * static_cast<double>(i)));
  }
  return summarize_stages(diags);
}

std::string format_report(const std::vector<QueryScalingPoint>& scaling,
                          const StageReport& stages) {
  std::string out;
  char buf[256];
  out += "query scaling\n";
  out += "  roots      hits          mean_ns\n";
  for (const QueryScalingPoint& p : scaling) {
    std::snprintf(buf, sizeof buf, "  %-10zu %-13zu %.1f\n", p.roots, p.planes, p.mean_ns);
    out += buf;
  }
  if (stages.frames > 0) {
    std::snprintf(buf, sizeof buf, "stages over %zu frames (ms)\n", stages.frames);
    out += buf;
    out += "  stage       mean      std       max\n";
    for (const StageStats& s : stages.stages) {
      std::snprintf(buf, sizeof buf, "  %-10s %9.3f %9.3f %9.3f\n", s.name.c_str(), s.mean_ms,
                    s.std_ms, s.max_ms);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "  stage sum %.3f ms vs total %.3f ms\n", stages.stage_sum_ms,
                  stages.total_ms);
    out += buf;
  }
  return out;
}

}  // namespace avm
