#pragma once

#include "avm/odometry.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace avm {

/// Every tunable of a run. Serialized as one flat JSON object whose keys are
/// the dotted names below; unknown keys are rejected.
struct RunConfig {
  OdometryConfig odometry;
  std::string scans;                // directory of scan files
  std::string format = "kitti-bin"; // kitti-bin | ply | sim
  std::string output = "trajectory.txt";
  std::string diagnostics;          // empty: no diagnostics file
  std::string map_dump;             // empty: no map dump
  bool timestamps = false;          // prefix pose lines with the frame stamp
  std::uint64_t seed = 42;

  void validate() const;
};

/// Pretty-printed JSON of every key.
std::string to_json_text(const RunConfig& cfg);
/// Applies the keys of a JSON object over `cfg`. Throws kParse on malformed
/// text, unknown keys or wrong value types.
void apply_json_text(RunConfig& cfg, const std::string& text);
RunConfig load_config(const std::string& path);

/// Dotted keys in sorted order.
std::vector<std::string> config_keys();
/// Sets one key from command-line text: JSON scalar syntax, with bare words
/// taken as strings.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& text);

/// One-line compact JSON of the resolved config, for output headers.
std::string config_line(const RunConfig& cfg);

}  // namespace avm
