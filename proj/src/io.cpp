#include "cubist/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "cubist/errors.hpp"

namespace cubist {

namespace {

using nlohmann::json;

bool host_is_little_endian() {
  const std::uint16_t probe = 1;
  return *reinterpret_cast<const std::uint8_t*>(&probe) == 1;
}

float byteswap(float value) {
  std::uint32_t bits;
  std::memcpy(&bits, &value, 4);
  bits = __builtin_bswap32(bits);
  std::memcpy(&value, &bits, 4);
  return value;
}

[[noreturn]] void pfm_fail(const std::istream& in, const std::string& what) {
  std::ostringstream msg;
  msg << "pfm: " << what << " (byte offset "
      << static_cast<long long>(const_cast<std::istream&>(in).tellg()) << ")";
  throw io_error(msg.str());
}

std::string next_pfm_token(std::istream& in) {
  // Whitespace-separated header token; PFM allows arbitrary whitespace.
  std::string token;
  char c;
  while (in.get(c) && std::isspace(static_cast<unsigned char>(c))) {
  }
  if (!in) return token;
  token.push_back(c);
  while (in.get(c) && !std::isspace(static_cast<unsigned char>(c)))
    token.push_back(c);
  return token;
}

json parse_json(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw io_error(what + ": malformed JSON");
  return j;
}

Vec3 vec3_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3)
    throw io_error(what + ": expected an array of three numbers");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

std::string format_number(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.9g", value);
  return buffer;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path);
  out << contents;
  if (!out) throw io_error("write failed for " + path);
}

// ---------------------------------------------------------------------------
// PFM

DepthMap load_pfm(std::istream& in) {
  const std::string magic = next_pfm_token(in);
  if (magic != "Pf") pfm_fail(in, "expected grayscale magic 'Pf'");
  DepthMap depth;
  try {
    depth.width = std::stoi(next_pfm_token(in));
    depth.height = std::stoi(next_pfm_token(in));
  } catch (const std::exception&) {
    pfm_fail(in, "bad dimensions");
  }
  if (depth.width <= 0 || depth.height <= 0) pfm_fail(in, "bad dimensions");
  double scale = 0.0;
  try {
    scale = std::stod(next_pfm_token(in));
  } catch (const std::exception&) {
    pfm_fail(in, "bad scale");
  }
  if (scale == 0.0) pfm_fail(in, "scale must be nonzero");
  const bool file_little_endian = scale < 0.0;

  depth.values.resize(static_cast<std::size_t>(depth.width) * depth.height);
  // Rows are stored bottom-to-top.
  for (int v = depth.height - 1; v >= 0; --v) {
    char* row = reinterpret_cast<char*>(&depth.values[static_cast<std::size_t>(v) *
                                                      depth.width]);
    in.read(row, static_cast<std::streamsize>(depth.width) * 4);
    if (in.gcount() != static_cast<std::streamsize>(depth.width) * 4)
      pfm_fail(in, "truncated raster");
  }
  if (file_little_endian != host_is_little_endian())
    for (float& x : depth.values) x = byteswap(x);
  return depth;
}

void save_pfm(const DepthMap& depth, std::ostream& out) {
  out << "Pf\n" << depth.width << " " << depth.height << "\n";
  out << (host_is_little_endian() ? "-1.0" : "1.0") << "\n";
  for (int v = depth.height - 1; v >= 0; --v) {
    const char* row = reinterpret_cast<const char*>(
        &depth.values[static_cast<std::size_t>(v) * depth.width]);
    out.write(row, static_cast<std::streamsize>(depth.width) * 4);
  }
  if (!out) throw io_error("pfm: write failed");
}

// ---------------------------------------------------------------------------
// CSV depth

DepthMap load_depth_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw io_error("csv: missing header");
  DepthMap depth;
  if (std::sscanf(line.c_str(), "%d,%d", &depth.width, &depth.height) != 2 ||
      depth.width <= 0 || depth.height <= 0)
    throw io_error("csv: bad header '" + line + "'");
  depth.values.reserve(static_cast<std::size_t>(depth.width) * depth.height);
  for (int v = 0; v < depth.height; ++v) {
    if (!std::getline(in, line)) throw io_error("csv: truncated rows");
    std::istringstream row(line);
    std::string cell;
    for (int u = 0; u < depth.width; ++u) {
      if (!std::getline(row, cell, ','))
        throw io_error("csv: truncated row " + std::to_string(v));
      try {
        depth.values.push_back(std::stof(cell));
      } catch (const std::exception&) {
        throw io_error("csv: bad value '" + cell + "'");
      }
    }
  }
  return depth;
}

void save_depth_csv(const DepthMap& depth, std::ostream& out) {
  out << depth.width << "," << depth.height << "\n";
  char buffer[40];
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const float z = depth.at(u, v);
      if (std::isnan(z)) {
        out << (u ? ",nan" : "nan");
      } else {
        std::snprintf(buffer, sizeof(buffer), "%.9g", static_cast<double>(z));
        if (u) out << ",";
        out << buffer;
      }
    }
    out << "\n";
  }
}

DepthMap load_depth(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
    return load_depth_csv(in);
  return load_pfm(in);
}

void save_depth(const DepthMap& depth, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
    save_depth_csv(depth, out);
  else
    save_pfm(depth, out);
}

// ---------------------------------------------------------------------------
// Intrinsics

Intrinsics load_intrinsics(const std::string& path) {
  const json j = parse_json(read_file(path), "intrinsics");
  Intrinsics K;
  try {
    K.fx = j.at("fx").get<double>();
    K.fy = j.at("fy").get<double>();
    K.cx = j.at("cx").get<double>();
    K.cy = j.at("cy").get<double>();
    K.width = j.at("width").get<int>();
    K.height = j.at("height").get<int>();
  } catch (const json::exception& e) {
    throw io_error(std::string("intrinsics: ") + e.what());
  }
  if (K.fx <= 0.0 || K.fy <= 0.0 || K.width <= 0 || K.height <= 0 ||
      K.cx < 0.0 || K.cx > K.width - 1 || K.cy < 0.0 || K.cy > K.height - 1)
    throw io_error("intrinsics: values out of range");
  return K;
}

void save_intrinsics(const Intrinsics& K, const std::string& path) {
  std::ostringstream out;
  out << "{\"cx\":" << format_number(K.cx) << ",\"cy\":" << format_number(K.cy)
      << ",\"fx\":" << format_number(K.fx) << ",\"fy\":" << format_number(K.fy)
      << ",\"height\":" << K.height << ",\"width\":" << K.width << "}\n";
  write_file(path, out.str());
}

// ---------------------------------------------------------------------------
// Weight maps

WeightMaps load_weight_maps(const std::string& path, int image_width,
                            int image_height,
                            std::span<const std::int64_t> pixel_index) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);

  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, "WMB1", 4) != 0)
    throw io_error("weight maps: bad magic");
  std::uint32_t q = 0, w = 0, h = 0;
  in.read(reinterpret_cast<char*>(&q), 4);
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&h), 4);
  if (!in || q == 0) throw io_error("weight maps: bad header");

  const std::uint32_t coarse_w = (image_width + 7) / 8;
  const std::uint32_t coarse_h = (image_height + 7) / 8;
  const bool full = w == static_cast<std::uint32_t>(image_width) &&
                    h == static_cast<std::uint32_t>(image_height);
  const bool eighth = w == coarse_w && h == coarse_h;
  if (!full && !eighth)
    throw io_error("weight maps: dimensions match neither full nor 1/8 "
                   "resolution");

  std::vector<double> selection(q);
  in.read(reinterpret_cast<char*>(selection.data()), sizeof(double) * q);
  if (!in) throw io_error("weight maps: truncated selection weights");
  double sum = 0.0;
  for (double s : selection) {
    if (!(s >= 0.0)) throw io_error("weight maps: negative selection weight");
    sum += s;
  }
  if (!(sum > 0.0)) throw io_error("weight maps: selection weights sum to 0");
  for (double& s : selection) s /= sum;

  WeightMaps maps;
  maps.selection = selection;
  std::vector<float> raw(static_cast<std::size_t>(w) * h);
  for (std::uint32_t k = 0; k < q; ++k) {
    in.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()) * 4);
    if (!in) throw io_error("weight maps: truncated map " + std::to_string(k));

    std::vector<double> per_point(pixel_index.size());
    for (std::size_t i = 0; i < pixel_index.size(); ++i) {
      const std::int64_t pix = pixel_index[i];
      const int u = static_cast<int>(pix % image_width);
      const int v = static_cast<int>(pix / image_width);
      const float value =
          full ? raw[static_cast<std::size_t>(v) * w + u]
               : raw[static_cast<std::size_t>(v / 8) * w + (u / 8)];
      if (!(value >= 0.0f))
        throw io_error("weight maps: negative weight in map " +
                       std::to_string(k));
      per_point[i] = static_cast<double>(value);
    }
    maps.maps.push_back(std::move(per_point));
  }
  return maps;
}

void save_weight_maps(std::span<const std::vector<float>> maps,
                      std::span<const double> selection, int width, int height,
                      const std::string& path) {
  if (maps.size() != selection.size())
    throw io_error("weight maps: selection count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path);
  out.write("WMB1", 4);
  const std::uint32_t q = static_cast<std::uint32_t>(maps.size());
  const std::uint32_t w = static_cast<std::uint32_t>(width);
  const std::uint32_t h = static_cast<std::uint32_t>(height);
  out.write(reinterpret_cast<const char*>(&q), 4);
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(&h), 4);
  out.write(reinterpret_cast<const char*>(selection.data()),
            sizeof(double) * selection.size());
  for (const auto& map : maps) {
    if (map.size() != static_cast<std::size_t>(width) * height)
      throw io_error("weight maps: map size mismatch");
    out.write(reinterpret_cast<const char*>(map.data()),
              static_cast<std::streamsize>(map.size()) * 4);
  }
  if (!out) throw io_error("write failed for " + path);
}

// ---------------------------------------------------------------------------
// Primitives

namespace {

std::string vec3_canonical(const Vec3& v) {
  return "[" + format_number(v.x()) + "," + format_number(v.y()) + "," +
         format_number(v.z()) + "]";
}

std::string cuboid_canonical(const Cuboid& h) {
  const Vec3 aa = axis_angle_from_rotation(h.rotation);
  return "{\"rotation_axis_angle\":" + vec3_canonical(aa) +
         ",\"size\":" + vec3_canonical(h.half_extents) +
         ",\"translation\":" + vec3_canonical(h.translation) + "}";
}

Cuboid cuboid_from_json_value(const json& j) {
  Cuboid h;
  h.half_extents = vec3_from_json(j.at("size"), "cuboid size");
  h.rotation = rotation_from_axis_angle(
      vec3_from_json(j.at("rotation_axis_angle"), "cuboid rotation"));
  h.translation = vec3_from_json(j.at("translation"), "cuboid translation");
  if (!(h.half_extents.minCoeff() > 0.0))
    throw io_error("cuboid: half extents must be positive");
  return h;
}

}  // namespace

std::string cuboids_to_json(std::span<const Cuboid> set) {
  std::string out = "{\"family\":\"cuboid\",\"primitives\":[";
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (i) out += ",";
    out += cuboid_canonical(set[i]);
  }
  out += "]}\n";
  return out;
}

std::vector<Cuboid> cuboids_from_json(const std::string& text) {
  const json j = parse_json(text, "primitives");
  if (j.contains("family") && j.at("family").get<std::string>() != "cuboid")
    throw io_error("primitives: not a cuboid file");
  const json& list = j.contains("primitives") ? j.at("primitives") : j;
  if (!list.is_array()) throw io_error("primitives: expected an array");
  std::vector<Cuboid> out;
  out.reserve(list.size());
  for (const json& item : list) out.push_back(cuboid_from_json_value(item));
  return out;
}

std::vector<Cuboid> load_cuboids(const std::string& path) {
  return cuboids_from_json(read_file(path));
}

void save_cuboids(std::span<const Cuboid> set, const std::string& path) {
  write_file(path, cuboids_to_json(set));
}

std::vector<Superquadric> superquadrics_from_json(const std::string& text) {
  const json j = parse_json(text, "primitives");
  if (j.contains("family") &&
      j.at("family").get<std::string>() != "superquadric")
    throw io_error("primitives: not a superquadric file");
  const json& list = j.contains("primitives") ? j.at("primitives") : j;
  if (!list.is_array()) throw io_error("primitives: expected an array");
  std::vector<Superquadric> out;
  out.reserve(list.size());
  for (const json& item : list) {
    Superquadric s;
    const json& eps = item.at("eps");
    if (!eps.is_array() || eps.size() != 2)
      throw io_error("superquadric: eps must have two entries");
    s.eps1 = eps[0].get<double>();
    s.eps2 = eps[1].get<double>();
    if (!(s.eps1 > 0.0) || s.eps1 > 2.0 || !(s.eps2 > 0.0) || s.eps2 > 2.0)
      throw io_error("superquadric: exponents must lie in (0, 2]");
    s.half_extents = vec3_from_json(item.at("size"), "superquadric size");
    if (!(s.half_extents.minCoeff() > 0.0))
      throw io_error("superquadric: size must be positive");
    s.rotation = rotation_from_axis_angle(vec3_from_json(
        item.at("rotation_axis_angle"), "superquadric rotation"));
    s.translation =
        vec3_from_json(item.at("translation"), "superquadric translation");
    out.push_back(s);
  }
  return out;
}

std::vector<Superquadric> load_superquadrics(const std::string& path) {
  return superquadrics_from_json(read_file(path));
}

// ---------------------------------------------------------------------------
// Reports and diagnostics

std::string report_to_json(const EvalReport& report) {
  std::string out = "{\"auc\":{";
  bool first = true;
  for (const auto& [bound, value] : report.auc) {
    if (!first) out += ",";
    first = false;
    out += "\"" + format_number(bound) + "\":" + format_number(value);
  }
  out += "},\"coverage_percent\":" + format_number(report.coverage_percent);
  out += ",\"mean_oa_all\":";
  out += std::isinf(report.mean_oa_all) ? "null"
                                        : format_number(report.mean_oa_all);
  out += ",\"mean_oa_covered\":" + format_number(report.mean_oa_covered);
  out += ",\"num_covered\":" + std::to_string(report.num_covered);
  out += ",\"num_points\":" + std::to_string(report.num_points);
  out += ",\"num_primitives\":" + std::to_string(report.num_primitives);
  out += "}\n";
  return out;
}

EvalReport report_from_json(const std::string& text) {
  const json j = parse_json(text, "report");
  EvalReport report;
  try {
    for (const auto& [key, value] : j.at("auc").items())
      report.auc[std::stod(key)] = value.get<double>();
    report.coverage_percent = j.at("coverage_percent").get<double>();
    report.mean_oa_all = j.at("mean_oa_all").is_null()
                             ? uncovered_distance()
                             : j.at("mean_oa_all").get<double>();
    report.mean_oa_covered = j.at("mean_oa_covered").get<double>();
    report.num_covered = j.at("num_covered").get<std::size_t>();
    report.num_points = j.at("num_points").get<std::size_t>();
    report.num_primitives = j.at("num_primitives").get<std::size_t>();
  } catch (const json::exception& e) {
    throw io_error(std::string("report: ") + e.what());
  }
  return report;
}

std::string diagnostics_to_jsonl(std::span<const RoundDiagnostics> rounds) {
  std::string out;
  for (const RoundDiagnostics& r : rounds) {
    out += "{\"accepted\":";
    out += r.accepted ? "true" : "false";
    out += ",\"cuboid\":" + cuboid_canonical(r.cuboid);
    out += ",\"gain\":" + format_number(r.gain);
    out += ",\"round\":" + std::to_string(r.round);
    out += ",\"theta\":" + format_number(r.theta);
    out += "}\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Meshes and masks

void export_obj(std::span<const Cuboid> set, const std::string& path) {
  std::ostringstream out;
  out << "# cuboid set, " << set.size() << " primitives\n";
  // Corner k has signs (x: bit0, y: bit1, z: bit2), 0 = negative.
  static const int kFaces[12][3] = {
      {0, 2, 3}, {0, 3, 1},  // -z
      {4, 5, 7}, {4, 7, 6},  // +z
      {0, 1, 5}, {0, 5, 4},  // -y
      {2, 6, 7}, {2, 7, 3},  // +y
      {0, 4, 6}, {0, 6, 2},  // -x
      {1, 3, 7}, {1, 7, 5},  // +x
  };
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Cuboid& h = set[i];
    for (int k = 0; k < 8; ++k) {
      const Vec3 local((k & 1) ? h.half_extents.x() : -h.half_extents.x(),
                       (k & 2) ? h.half_extents.y() : -h.half_extents.y(),
                       (k & 4) ? h.half_extents.z() : -h.half_extents.z());
      const Vec3 p = h.to_world(local);
      out << "v " << format_number(p.x()) << " " << format_number(p.y()) << " "
          << format_number(p.z()) << "\n";
    }
    const std::size_t base = 8 * i + 1;  // OBJ indices are 1-based
    for (const auto& f : kFaces)
      out << "f " << base + f[0] << " " << base + f[1] << " " << base + f[2]
          << "\n";
  }
  write_file(path, out.str());
}

void save_mask_pgm(std::span<const std::uint8_t> mask, int width, int height,
                   const std::string& path) {
  if (mask.size() != static_cast<std::size_t>(width) * height)
    throw io_error("mask: size mismatch");
  std::ostringstream out;
  out << "P5\n" << width << " " << height << "\n255\n";
  for (std::uint8_t m : mask) out.put(m ? '\xff' : '\0');
  write_file(path, out.str());
}

}  // namespace cubist
