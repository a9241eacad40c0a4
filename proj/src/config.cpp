#include "avm/config.hpp"

#include "avm/error.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace avm {
namespace {

using nlohmann::json;

constexpr double kDeg = M_PI / 180.0;

// Binding between a flat key and a config field.
struct Field {
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

template <typename T>
T as(const json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw std::invalid_argument("boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw std::invalid_argument("integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw std::invalid_argument("number");
    } else {
      if (!v.is_string()) throw std::invalid_argument("string");
    }
    return v.get<T>();
  } catch (const std::exception& e) {
    throw Error(ErrorCategory::kParse, "config key '" + key + "' expects a " + e.what());
  }
}

#define AVM_FIELD(key, type, expr)                                            \
  {                                                                           \
    key, Field {                                                              \
      [](const RunConfig& c) { return json(c.expr); },                        \
          [](RunConfig& c, const json& v) { c.expr = as<type>(v, key); }      \
    }                                                                         \
  }

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      AVM_FIELD("sensor.sigma_range", double, odometry.noise.sigma_range),
      {"sensor.sigma_bearing_deg",
       Field{[](const RunConfig& c) { return json(c.odometry.noise.sigma_bearing / kDeg); },
             [](RunConfig& c, const json& v) {
               c.odometry.noise.sigma_bearing = as<double>(v, "sensor.sigma_bearing_deg") * kDeg;
             }}},
      AVM_FIELD("map.voxel_size", double, odometry.map.voxel_size),
      AVM_FIELD("map.max_layer", int, odometry.map.max_layer),
      AVM_FIELD("map.plane_threshold", double, odometry.map.plane_threshold),
      AVM_FIELD("map.min_points", int, odometry.map.min_points),
      AVM_FIELD("map.converge_points", int, odometry.map.converge_points),
      AVM_FIELD("map.recent_points", int, odometry.map.recent_points),
      {"map.rebuild_angle_deg",
       Field{[](const RunConfig& c) { return json(c.odometry.map.rebuild_angle / kDeg); },
             [](RunConfig& c, const json& v) {
               c.odometry.map.rebuild_angle = as<double>(v, "map.rebuild_angle_deg") * kDeg;
             }}},
      AVM_FIELD("map.rebuild_strikes", int, odometry.map.rebuild_strikes),
      AVM_FIELD("map.recent_min_eigen_ratio", double, odometry.map.recent_min_eigen_ratio),
      AVM_FIELD("map.max_buffer", int, odometry.map.max_buffer),
      AVM_FIELD("matcher.downsample_leaf", double, odometry.downsample_leaf),
      AVM_FIELD("matcher.query_neighbors", bool, odometry.map.query_neighbors),
      AVM_FIELD("estimator.process_rot_var", double, odometry.estimator.process_rot_var),
      AVM_FIELD("estimator.process_trans_var", double, odometry.estimator.process_trans_var),
      AVM_FIELD("estimator.max_iter", int, odometry.estimator.max_iter),
      AVM_FIELD("estimator.eps_iter", double, odometry.estimator.eps_iter),
      AVM_FIELD("estimator.rematch", bool, odometry.estimator.rematch),
      AVM_FIELD("estimator.max_condition", double, odometry.estimator.max_condition),
      AVM_FIELD("io.scans", std::string, scans),
      AVM_FIELD("io.format", std::string, format),
      AVM_FIELD("io.output", std::string, output),
      AVM_FIELD("io.diagnostics", std::string, diagnostics),
      AVM_FIELD("io.map_dump", std::string, map_dump),
      AVM_FIELD("io.timestamps", bool, timestamps),
      AVM_FIELD("seed", std::uint64_t, seed),
  };
  return table;
}

#undef AVM_FIELD

json to_json(const RunConfig& cfg) {
  json j = json::object();
  for (const auto& [key, f] : fields()) j[key] = f.get(cfg);
  return j;
}

}  // namespace

void RunConfig::validate() const {
  odometry.validate();
  if (format != "kitti-bin" && format != "ply" && format != "sim") {
    throw Error(ErrorCategory::kUsage, "unknown scan format '" + format + "'");
  }
}

std::string to_json_text(const RunConfig& cfg) { return to_json(cfg).dump(2); }

std::string config_line(const RunConfig& cfg) { return to_json(cfg).dump(); }

void apply_json_text(RunConfig& cfg, const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCategory::kParse, std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCategory::kParse, "config must be a JSON object");
  const auto& table = fields();
  for (const auto& [key, value] : j.items()) {
    auto it = table.find(key);
    if (it == table.end()) throw Error(ErrorCategory::kParse, "unknown config key '" + key + "'");
    it->second.set(cfg, value);
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::kIo, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig cfg;
  apply_json_text(cfg, ss.str());
  return cfg;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [key, f] : fields()) keys.push_back(key);
  return keys;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& text) {
  auto it = fields().find(key);
  if (it == fields().end()) throw Error(ErrorCategory::kUsage, "unknown config key '" + key + "'");
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded() || v.is_object() || v.is_array()) v = text;
  try {
    it->second.set(cfg, v);
  } catch (const Error&) {
    if (v.is_string()) throw;
    it->second.set(cfg, json(text));  // string keys given numeric-looking text
  }
}

}  // namespace avm
