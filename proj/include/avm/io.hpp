#pragma once

#include "avm/estimator.hpp"
#include "avm/simulator.hpp"
#include "avm/uncertainty.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace avm {

enum class ScanFormat { kKittiBin, kPlyAscii, kSim };

ScanFormat parse_scan_format(const std::string& name);
std::string extension_of(ScanFormat f);

/// Reads one scan as (bearing, depth) returns; zero-range points are dropped.
///  kitti-bin: little-endian float32 records (x, y, z, intensity)
///  ply:       ASCII PLY with x, y, z vertex properties
///  sim:       "# avm-simscan v1" text, see write_sim_scan
std::vector<RawPoint> load_scan(const std::string& path, ScanFormat format);
std::vector<RawPoint> parse_kitti_bin(const std::string& bytes);
std::vector<RawPoint> parse_ply(std::istream& is);
std::vector<RawPoint> parse_sim(std::istream& is);

/// Text export of a simulated scan: header, ground-truth pose line
/// "pose r00 r01 ... r22 tx ty tz", then one "x y z patch_id" line per return
/// in the sensor frame.
void write_sim_scan(std::ostream& os, const sim::SimScan& scan);
void write_kitti_bin(std::ostream& os, const std::vector<RawPoint>& scan);

/// Files in `dir` with the format's extension, sorted by name.
std::vector<std::string> list_scans(const std::string& dir, ScanFormat format);

struct PoseRecord {
  std::optional<double> stamp;
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();
};

/// KITTI pose line: 3x4 [R | t] row-major, optionally prefixed by a stamp.
std::string format_pose_line(const PoseRecord& rec);
/// Reads 12- or 13-number lines; '#' lines are skipped.
std::vector<PoseRecord> read_poses(std::istream& is);
std::vector<PoseRecord> read_poses(const std::string& path);
void write_poses(std::ostream& os, const std::vector<PoseRecord>& poses);

}  // namespace avm
