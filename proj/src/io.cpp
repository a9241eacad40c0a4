#include "avm/io.hpp"

#include "avm/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace avm {
namespace {

float read_le_float(const char* p) {
  std::uint32_t u;
  std::memcpy(&u, p, 4);
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

void push_cartesian(std::vector<RawPoint>& out, const Vec3& p) {
  const double r = p.norm();
  if (r > 0.0 && std::isfinite(r)) out.push_back(RawPoint{p / r, r});
}

std::string slurp(const std::string& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw Error(ErrorCategory::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ScanFormat parse_scan_format(const std::string& name) {
  if (name == "kitti-bin") return ScanFormat::kKittiBin;
  if (name == "ply" || name == "ply-ascii") return ScanFormat::kPlyAscii;
  if (name == "sim") return ScanFormat::kSim;
  throw Error(ErrorCategory::kUsage, "unknown scan format '" + name + "'");
}

std::string extension_of(ScanFormat f) {
  switch (f) {
    case ScanFormat::kKittiBin: return ".bin";
    case ScanFormat::kPlyAscii: return ".ply";
    case ScanFormat::kSim: return ".sim";
  }
  return "";
}

std::vector<RawPoint> parse_kitti_bin(const std::string& bytes) {
  constexpr std::size_t kRecord = 16;
  if (bytes.size() % kRecord != 0) {
    const std::size_t offset = bytes.size() - bytes.size() % kRecord;
    throw Error(ErrorCategory::kParse, "kitti-bin: truncated record at byte offset " +
                                           std::to_string(offset));
  }
  std::vector<RawPoint> out;
  out.reserve(bytes.size() / kRecord);
  for (std::size_t off = 0; off < bytes.size(); off += kRecord) {
    const char* p = bytes.data() + off;
    push_cartesian(out, Vec3(read_le_float(p), read_le_float(p + 4), read_le_float(p + 8)));
  }
  return out;
}

std::vector<RawPoint> parse_ply(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("ply", 0) != 0) {
    throw Error(ErrorCategory::kParse, "ply: missing magic line");
  }
  std::size_t vertices = 0;
  bool in_vertex = false, ascii = false;
  std::vector<std::string> props;
  while (std::getline(is, line)) {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "format") {
      std::string kind;
      ss >> kind;
      ascii = kind == "ascii";
    } else if (tok == "element") {
      std::string name;
      std::size_t count = 0;
      ss >> name >> count;
      in_vertex = name == "vertex";
      if (in_vertex) vertices = count;
    } else if (tok == "property" && in_vertex) {
      std::string type, name;
      ss >> type >> name;
      props.push_back(name);
    } else if (tok == "end_header") {
      break;
    }
  }
  if (!ascii) throw Error(ErrorCategory::kParse, "ply: only ASCII format is supported");
  auto index_of = [&](const char* name) {
    auto it = std::find(props.begin(), props.end(), name);
    if (it == props.end()) throw Error(ErrorCategory::kParse, std::string("ply: missing property ") + name);
    return static_cast<std::size_t>(it - props.begin());
  };
  const std::size_t ix = index_of("x"), iy = index_of("y"), iz = index_of("z");
  std::vector<RawPoint> out;
  out.reserve(vertices);
  std::vector<double> vals(props.size());
  for (std::size_t v = 0; v < vertices; ++v) {
    if (!std::getline(is, line)) {
      throw Error(ErrorCategory::kParse, "ply: expected " + std::to_string(vertices) +
                                             " vertices, got " + std::to_string(v));
    }
    std::istringstream ss(line);
    for (double& x : vals) {
      if (!(ss >> x)) throw Error(ErrorCategory::kParse, "ply: malformed vertex " + std::to_string(v));
    }
    push_cartesian(out, Vec3(vals[ix], vals[iy], vals[iz]));
  }
  return out;
}

std::vector<RawPoint> parse_sim(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# avm-simscan v1", 0) != 0) {
    throw Error(ErrorCategory::kParse, "sim: missing '# avm-simscan v1' header");
  }
  std::vector<RawPoint> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line.rfind("pose", 0) == 0) continue;
    std::istringstream ss(line);
    double x, y, z;
    long id;
    if (!(ss >> x >> y >> z >> id)) {
      throw Error(ErrorCategory::kParse, "sim: malformed line " + std::to_string(lineno));
    }
    push_cartesian(out, Vec3(x, y, z));
  }
  return out;
}

std::vector<RawPoint> load_scan(const std::string& path, ScanFormat format) {
  switch (format) {
    case ScanFormat::kKittiBin:
      return parse_kitti_bin(slurp(path, std::ios::binary));
    case ScanFormat::kPlyAscii: {
      std::istringstream ss(slurp(path, std::ios::in));
      return parse_ply(ss);
    }
    case ScanFormat::kSim: {
      std::istringstream ss(slurp(path, std::ios::in));
      return parse_sim(ss);
    }
  }
  throw Error(ErrorCategory::kUsage, "unknown scan format");
}

void write_sim_scan(std::ostream& os, const sim::SimScan& scan) {
  char buf[256];
  os << "# avm-simscan v1\n";
  os << "pose";
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      std::snprintf(buf, sizeof buf, " %.17g", scan.pose.R(r, c));
      os << buf;
    }
  }
  for (int i = 0; i < 3; ++i) {
    std::snprintf(buf, sizeof buf, " %.17g", scan.pose.t(i));
    os << buf;
  }
  os << '\n';
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const Vec3 p = scan.points[i].local();
    const int id = i < scan.patch_ids.size() ? scan.patch_ids[i] : -1;
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %d\n", p.x(), p.y(), p.z(), id);
    os << buf;
  }
}

void write_kitti_bin(std::ostream& os, const std::vector<RawPoint>& scan) {
  for (const RawPoint& rp : scan) {
    const Vec3 p = rp.local();
    const float rec[4] = {static_cast<float>(p.x()), static_cast<float>(p.y()),
                          static_cast<float>(p.z()), 0.0f};
    for (float f : rec) {
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
      os.write(reinterpret_cast<const char*>(&u), 4);
    }
  }
}

std::vector<std::string> list_scans(const std::string& dir, ScanFormat format) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCategory::kIo, "not a directory: '" + dir + "'");
  const std::string ext = extension_of(format);
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) {
      out.push_back(entry.path().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string format_pose_line(const PoseRecord& rec) {
  char buf[512];
  int n = 0;
  if (rec.stamp) n += std::snprintf(buf + n, sizeof buf - n, "%.6f ", *rec.stamp);
  for (int r = 0; r < 3; ++r) {
    n += std::snprintf(buf + n, sizeof buf - n, "%.9e %.9e %.9e %.9e", rec.R(r, 0), rec.R(r, 1),
                       rec.R(r, 2), rec.t(r));
    if (r < 2) n += std::snprintf(buf + n, sizeof buf - n, " ");
  }
  return std::string(buf, static_cast<std::size_t>(n));
}

std::vector<PoseRecord> read_poses(std::istream& is) {
  std::vector<PoseRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    std::vector<double> v;
    double x;
    while (ss >> x) v.push_back(x);
    if (!ss.eof() || (v.size() != 12 && v.size() != 13)) {
      throw Error(ErrorCategory::kParse,
                  "pose line " + std::to_string(lineno) + ": expected 12 or 13 numbers");
    }
    PoseRecord rec;
    std::size_t o = 0;
    if (v.size() == 13) rec.stamp = v[o++];
    for (int r = 0; r < 3; ++r) {
      rec.R.row(r) << v[o], v[o + 1], v[o + 2];
      rec.t(r) = v[o + 3];
      o += 4;
    }
    out.push_back(rec);
  }
  return out;
}

std::vector<PoseRecord> read_poses(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::kIo, "cannot open '" + path + "'");
  return read_poses(in);
}

void write_poses(std::ostream& os, const std::vector<PoseRecord>& poses) {
  for (const PoseRecord& p : poses) os << format_pose_line(p) << '\n';
}

}  // namespace avm
