#include "yoco/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include "yoco/errors.hpp"

namespace yoco::io {

namespace fs = std::filesystem;

namespace {

void round_in_place(Json& j) {
  if (j.is_number_float()) {
    j = round_sig12(j.get<double>());
  } else if (j.is_structured()) {
    for (auto& v : j) round_in_place(v);
  }
}

// Strict field access over one JSON object.
class Fields {
 public:
  Fields(const Json& j, std::string path, std::string where)
      : j_(j), path_(std::move(path)), where_(std::move(where)) {
    if (!j_.is_object()) fail(where_ + " must be an object");
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(path_, 0, what); }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const Json& at(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail(where_ + ": missing key '" + key + "'");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_number()) fail(where_ + "." + key + " must be a number");
    return v.get<double>();
  }

  std::int64_t integer(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_number_integer()) fail(where_ + "." + key + " must be an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(where_ + "." + key + " must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_boolean()) fail(where_ + "." + key + " must be a boolean");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_string()) fail(where_ + "." + key + " must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::size_t n) {
    const Json& v = at(key);
    if (!v.is_array() || v.size() != n) {
      fail(where_ + "." + key + " must be an array of " + std::to_string(n) + " numbers");
    }
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(where_ + "." + key + " must contain numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  Vector3 vec3(const std::string& key) {
    const auto v = numbers(key, 3);
    return {v[0], v[1], v[2]};
  }

  template <typename T>
  void optional(const std::string& key, T& field, T (Fields::*getter)(const std::string&)) {
    if (j_.contains(key)) field = static_cast<T>((this->*getter)(key));
  }

  void optional_number(const std::string& key, double& field) {
    if (j_.contains(key)) field = number(key);
  }
  void optional_int(const std::string& key, int& field) {
    if (j_.contains(key)) field = static_cast<int>(integer(key));
  }

  /// Fails on keys never requested.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(where_ + ": unknown key '" + it.key() + "'");
    }
  }

  const std::string& path() const { return path_; }

 private:
  const Json& j_;
  std::string path_;
  std::string where_;
  std::set<std::string> seen_;
};

Json matrix_to_json(const Matrix3& r) {
  Json a = Json::array();
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) a.push_back(r(i, k));
  }
  return a;
}

Matrix3 matrix_from(Fields& f, const std::string& key) {
  const auto v = f.numbers(key, 9);
  Matrix3 r;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) r(i, k) = v[static_cast<std::size_t>(3 * i + k)];
  }
  return r;
}

Json vec_to_json(const Vector3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Frame frame_from(Fields& f, const std::string& key) {
  try {
    return frame_from_string(f.string(key));
  } catch (const InvalidArgument& e) {
    f.fail(e.what());
  }
}

bool starts_with_ply(const std::string& text) {
  return text.rfind("ply\n", 0) == 0 || text.rfind("ply\r\n", 0) == 0;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

bool parse_double(const std::string& tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

PointCloud parse_xyz(const std::string& text, const std::string& path) {
  PointCloud cloud;
  cloud.frame = Frame::kLiDAR;
  std::istringstream is(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    line = strip_cr(line);
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto tok = split_ws(line);
    if (tok.size() != 3) {
      throw ParseError(path, n, "expected 3 values 'x y z', got " + std::to_string(tok.size()));
    }
    Point3 p;
    for (int i = 0; i < 3; ++i) {
      if (!parse_double(tok[static_cast<std::size_t>(i)], p[i])) {
        throw ParseError(path, n, "invalid number '" + tok[static_cast<std::size_t>(i)] + "'");
      }
    }
    cloud.points.push_back(p);
  }
  return cloud;
}

PointCloud parse_ply(const std::string& text, const std::string& path) {
  std::istringstream is(text);
  std::string line;
  std::size_t n = 0;
  std::getline(is, line);
  ++n;
  bool ascii = false;
  bool in_vertex = false;
  bool vertex_seen = false;
  std::size_t vertex_count = 0;
  std::vector<std::string> props;
  while (true) {
    if (!std::getline(is, line)) throw ParseError(path, n, "PLY header not terminated");
    ++n;
    const auto tok = split_ws(strip_cr(line));
    if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "format") {
      if (tok.size() < 2 || tok[1] != "ascii") throw ParseError(path, n, "only ASCII PLY is supported");
      ascii = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) throw ParseError(path, n, "malformed element line");
      if (tok[1] == "vertex") {
        if (vertex_seen) throw ParseError(path, n, "duplicate vertex element");
        std::size_t c = 0;
        const auto [ptr, ec] = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), c);
        if (ec != std::errc() || ptr != tok[2].data() + tok[2].size()) {
          throw ParseError(path, n, "invalid vertex count '" + tok[2] + "'");
        }
        vertex_count = c;
        vertex_seen = true;
        in_vertex = true;
      } else {
        if (!vertex_seen) throw ParseError(path, n, "vertex element must come first");
        in_vertex = false;
      }
    } else if (tok[0] == "property") {
      if (in_vertex) {
        if (tok.size() != 3 || tok[1] == "list") {
          throw ParseError(path, n, "unsupported vertex property");
        }
        props.push_back(tok[2]);
      }
    } else {
      throw ParseError(path, n, "unexpected PLY header line '" + tok[0] + "'");
    }
  }
  if (!ascii) throw ParseError(path, n, "PLY format line missing");
  if (!vertex_seen) throw ParseError(path, n, "PLY has no vertex element");
  int ix = -1, iy = -1, iz = -1;
  for (std::size_t i = 0; i < props.size(); ++i) {
    if (props[i] == "x") ix = static_cast<int>(i);
    if (props[i] == "y") iy = static_cast<int>(i);
    if (props[i] == "z") iz = static_cast<int>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) throw ParseError(path, n, "vertex element lacks x, y or z");

  PointCloud cloud;
  cloud.frame = Frame::kLiDAR;
  cloud.points.reserve(vertex_count);
  while (cloud.points.size() < vertex_count) {
    if (!std::getline(is, line)) {
      throw ParseError(path, n, "expected " + std::to_string(vertex_count) + " vertices, got " +
                                    std::to_string(cloud.points.size()));
    }
    ++n;
    const auto tok = split_ws(strip_cr(line));
    if (tok.empty()) continue;
    if (tok.size() != props.size()) {
      throw ParseError(path, n, "expected " + std::to_string(props.size()) + " values");
    }
    std::vector<double> v(tok.size());
    for (std::size_t i = 0; i < tok.size(); ++i) {
      if (!parse_double(tok[i], v[i])) throw ParseError(path, n, "invalid number '" + tok[i] + "'");
    }
    cloud.points.emplace_back(v[static_cast<std::size_t>(ix)], v[static_cast<std::size_t>(iy)],
                              v[static_cast<std::size_t>(iz)]);
  }
  return cloud;
}

std::string format_g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

Json primitive_to_json(const synth::Primitive& p) {
  return Json{{"name", p.name},
              {"kind", std::string(synth::to_string(p.kind))},
              {"center", vec_to_json(p.center)},
              {"orientation", matrix_to_json(p.orientation)},
              {"extent", vec_to_json(p.extent)}};
}

synth::Primitive primitive_from_json(const Json& j, const std::string& path) {
  Fields f(j, path, "clutter entry");
  synth::Primitive p;
  p.name = f.string("name");
  try {
    p.kind = synth::primitive_kind_from_string(f.string("kind"));
  } catch (const InvalidArgument& e) {
    f.fail(e.what());
  }
  p.center = f.vec3("center");
  if (f.has("orientation")) p.orientation = matrix_from(f, "orientation");
  p.extent = f.vec3("extent");
  f.finish();
  if (!is_rotation(p.orientation, 1e-6)) f.fail("primitive '" + p.name + "' orientation is not a rotation");
  p.orientation = project_to_rotation(p.orientation);
  return p;
}

}  // namespace

double round_sig12(double x) {
  if (!std::isfinite(x) || x == 0.0) return x == 0.0 ? 0.0 : x;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return std::strtod(buf, nullptr);
}

std::string dump_canonical(const Json& doc) {
  Json copy = doc;
  round_in_place(copy);
  return copy.dump(2) + "\n";
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + tmp.string() + "' for writing");
    os << text;
    os.flush();
    if (!os) throw IoError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "'");
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // Byte offset to line number.
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + static_cast<std::size_t>(
                              std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n'));
    throw ParseError(path.string(), line, "invalid JSON");
  }
}

PointCloud read_point_file(const fs::path& path) {
  const std::string text = read_text(path);
  return starts_with_ply(text) ? parse_ply(text, path.string()) : parse_xyz(text, path.string());
}

void write_point_file(const fs::path& path, const PointCloud& cloud) {
  std::string out = "# x y z (" + std::string(to_string(cloud.frame)) + " frame, meters)\n";
  for (const auto& p : cloud.points) {
    out += format_g17(p.x()) + ' ' + format_g17(p.y()) + ' ' + format_g17(p.z()) + '\n';
  }
  write_text_atomic(path, out);
}

std::vector<int> read_label_file(const fs::path& path) {
  std::istringstream is(read_text(path));
  std::vector<int> labels;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    line = strip_cr(line);
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    int v = 0;
    const auto [ptr, ec] = std::from_chars(tok[0].data(), tok[0].data() + tok[0].size(), v);
    if (tok.size() != 1 || ec != std::errc() || ptr != tok[0].data() + tok[0].size()) {
      throw ParseError(path.string(), n, "expected one integer label");
    }
    labels.push_back(v);
  }
  return labels;
}

void write_label_file(const fs::path& path, const std::vector<int>& labels) {
  std::string out = "# label: 0 board, i + 1 clutter primitive i\n";
  for (const int l : labels) out += std::to_string(l) + '\n';
  write_text_atomic(path, out);
}

Json to_json(const RigidTransform& t) {
  return Json{{"rotation", matrix_to_json(t.rotation())},
              {"translation", vec_to_json(t.translation())},
              {"source", std::string(to_string(t.source()))},
              {"target", std::string(to_string(t.target()))}};
}

RigidTransform transform_from_json(const Json& j, const std::string& path) {
  Fields f(j, path, "transform");
  const Matrix3 r = matrix_from(f, "rotation");
  const Vector3 t = f.vec3("translation");
  const Frame src = frame_from(f, "source");
  const Frame dst = frame_from(f, "target");
  f.finish();
  if (!is_rotation(r, 1e-9)) f.fail("rotation is not orthonormal");
  return RigidTransform::orthonormalized(r, t, src, dst);
}

Json to_json(const CameraIntrinsics& k) {
  return Json{{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy},
              {"image_width", k.image_width}, {"image_height", k.image_height}};
}

CameraIntrinsics intrinsics_from_json(const Json& j, const std::string& path) {
  Fields f(j, path, "intrinsics");
  CameraIntrinsics k;
  k.fx = f.number("fx");
  k.fy = f.number("fy");
  k.cx = f.number("cx");
  k.cy = f.number("cy");
  k.image_width = static_cast<int>(f.integer("image_width"));
  k.image_height = static_cast<int>(f.integer("image_height"));
  f.finish();
  try {
    k.validate();
  } catch (const InvalidArgument& e) {
    f.fail(e.what());
  }
  return k;
}

Json to_json(const BoardSpec& b) {
  return Json{{"rows", b.rows}, {"cols", b.cols}, {"square_size", b.square_size}};
}

BoardSpec board_spec_from_json(const Json& j, const std::string& path) {
  Fields f(j, path, "board_spec");
  BoardSpec b;
  b.rows = static_cast<int>(f.integer("rows"));
  b.cols = static_cast<int>(f.integer("cols"));
  b.square_size = f.number("square_size");
  f.finish();
  try {
    b.validate();
  } catch (const InvalidArgument& e) {
    f.fail(e.what());
  }
  return b;
}

Json to_json(const ExtractionDiagnostics& d) {
  Json cands = Json::array();
  for (const auto& c : d.candidates) {
    cands.push_back(Json{{"cluster_index", c.cluster_index},
                         {"cluster_size", c.cluster_size},
                         {"normal", vec_to_json(c.normal.vec())},
                         {"alpha_deg", c.alpha_deg},
                         {"distance", c.distance},
                         {"density", c.density},
                         {"passed_angle_filter", c.passed_angle_filter},
                         {"within_tolerance", c.within_tolerance}});
  }
  return Json{{"input_points", d.input_points},
              {"dropped_points", d.dropped_points},
              {"cluster_count", d.cluster_count},
              {"failed_plane_fits", d.failed_plane_fits},
              {"prior_distance", d.prior_distance},
              {"candidates", cands},
              {"selected", d.selected ? Json(*d.selected) : Json(nullptr)},
              {"low_confidence", d.low_confidence}};
}

Json to_json(const ObservabilityReport& r) {
  return Json{{"distinct_orientation_count", r.distinct_orientation_count},
              {"normal_gram_eigenvalues", Json::array({r.normal_gram_eigenvalues[0],
                                                       r.normal_gram_eigenvalues[1],
                                                       r.normal_gram_eigenvalues[2]})},
              {"rank_estimate", r.rank_estimate},
              {"warning", r.warning ? Json(*r.warning) : Json(nullptr)}};
}

Json to_json(const Config& c) {
  const auto& e = c.extraction;
  const auto& s = c.solver;
  Json solver{{"max_iterations", s.max_iterations},
              {"parameter_tolerance", s.parameter_tolerance},
              {"residual_tolerance", s.residual_tolerance},
              {"damping_init", s.damping_init},
              {"huber_delta", s.huber_delta},
              {"min_points", s.min_points}};
  return Json{{"seed", c.seed},
              {"jobs", c.jobs},
              {"extraction",
               Json{{"knn_k", e.knn_k},
                    {"dbscan_eps", e.dbscan_eps},
                    {"dbscan_min_pts", e.dbscan_min_pts},
                    {"normal_angle_merge_deg", e.normal_angle_merge_deg},
                    {"ransac_threshold", e.ransac_threshold},
                    {"ransac_iterations", e.ransac_iterations},
                    {"theta_deg", e.theta_deg},
                    {"reference_axis", vec_to_json(e.reference_axis.vec())},
                    {"distance_tolerance", e.distance_tolerance}}},
              {"solver", solver}};
}

Config config_from_json(const Json& j, const std::string& path, Config base) {
  Fields f(j, path, "params");
  Config c = std::move(base);
  if (j.contains("seed")) c.seed = f.unsigned_integer("seed");
  f.optional_int("jobs", c.jobs);
  if (j.contains("extraction")) {
    Fields e(f.at("extraction"), path, "extraction");
    auto& x = c.extraction;
    e.optional_int("knn_k", x.knn_k);
    e.optional_number("dbscan_eps", x.dbscan_eps);
    e.optional_int("dbscan_min_pts", x.dbscan_min_pts);
    e.optional_number("normal_angle_merge_deg", x.normal_angle_merge_deg);
    e.optional_number("ransac_threshold", x.ransac_threshold);
    e.optional_int("ransac_iterations", x.ransac_iterations);
    e.optional_number("theta_deg", x.theta_deg);
    if (j.at("extraction").contains("reference_axis")) {
      try {
        x.reference_axis = UnitVector3(e.vec3("reference_axis"));
      } catch (const DegenerateError&) {
        e.fail("extraction.reference_axis must be non-zero");
      }
    }
    e.optional_number("distance_tolerance", x.distance_tolerance);
    e.finish();
  }
  if (j.contains("solver")) {
    Fields s(f.at("solver"), path, "solver");
    auto& x = c.solver;
    s.optional_int("max_iterations", x.max_iterations);
    s.optional_number("parameter_tolerance", x.parameter_tolerance);
    s.optional_number("residual_tolerance", x.residual_tolerance);
    s.optional_number("damping_init", x.damping_init);
    s.optional_number("huber_delta", x.huber_delta);
    if (j.at("solver").contains("min_points")) x.min_points = s.unsigned_integer("min_points");
    s.finish();
  }
  f.finish();
  c.extraction.seed = c.seed;
  c.extraction.jobs = c.jobs;
  try {
    c.extraction.validate();
    c.solver.validate();
  } catch (const InvalidArgument& e) {
    f.fail(e.what());
  }
  if (c.jobs < 1) f.fail("jobs must be at least 1");
  return c;
}

Config read_params_file(const fs::path& path) {
  return config_from_json(read_json(path), path.string());
}

fs::path FrameFile::resolve_cloud(const fs::path& frame_path) const {
  return cloud.is_absolute() ? cloud : frame_path.parent_path() / cloud;
}

Json to_json(const FrameFile& f) {
  Json j{{"cloud", f.cloud.generic_string()},
         {"intrinsics", to_json(f.intrinsics)},
         {"board_spec", to_json(f.board_spec)}};
  if (f.corners) {
    Json c = Json::array();
    for (const auto& p : *f.corners) c.push_back(Json::array({p.x(), p.y()}));
    j["corners"] = c;
  }
  if (f.board_pose) j["board_pose"] = to_json(*f.board_pose);
  return j;
}

FrameFile read_frame_file(const fs::path& path) {
  const std::string p = path.string();
  const Json j = read_json(path);
  Fields f(j, p, "frame");
  FrameFile out;
  out.cloud = f.string("cloud");
  out.intrinsics = intrinsics_from_json(f.at("intrinsics"), p);
  out.board_spec = board_spec_from_json(f.at("board_spec"), p);
  const bool has_corners = j.contains("corners");
  const bool has_pose = j.contains("board_pose");
  if (has_corners == has_pose) f.fail("frame needs exactly one of 'corners' or 'board_pose'");
  if (has_corners) {
    const Json& c = f.at("corners");
    if (!c.is_array()) f.fail("corners must be an array");
    CornerObservations corners;
    for (const auto& e : c) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
        f.fail("each corner must be [u, v]");
      }
      corners.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    out.corners = std::move(corners);
  } else {
    out.board_pose = transform_from_json(f.at("board_pose"), p);
    if (out.board_pose->source() != Frame::kCamera || out.board_pose->target() != Frame::kWorld) {
      f.fail("board_pose must map camera -> world");
    }
  }
  f.finish();
  return out;
}

void write_frame_file(const fs::path& path, const FrameFile& f) {
  write_text_atomic(path, dump_canonical(to_json(f)));
}

GroundTruthFile read_ground_truth_file(const fs::path& path) {
  const std::string p = path.string();
  const Json j = read_json(path);
  Fields f(j, p, "ground truth");
  GroundTruthFile g;
  g.lidar_to_camera = transform_from_json(f.at("lidar_to_camera"), p);
  if (g.lidar_to_camera.source() != Frame::kLiDAR || g.lidar_to_camera.target() != Frame::kCamera) {
    f.fail("lidar_to_camera must map lidar -> camera");
  }
  if (j.contains("board_poses")) {
    const Json& b = f.at("board_poses");
    if (!b.is_array()) f.fail("board_poses must be an array");
    for (const auto& e : b) g.board_poses.push_back(transform_from_json(e, p));
  }
  f.finish();
  return g;
}

void write_ground_truth_file(const fs::path& path, const GroundTruthFile& g) {
  Json poses = Json::array();
  for (const auto& b : g.board_poses) poses.push_back(to_json(b));
  write_text_atomic(path, dump_canonical(Json{{"lidar_to_camera", to_json(g.lidar_to_camera)},
                                              {"board_poses", poses}}));
}

RigidTransform ResultFile::transform() const {
  return RigidTransform::orthonormalized(rotation, translation, Frame::kLiDAR, Frame::kCamera);
}

Json to_json(const ResultFile& r) {
  return Json{{"rotation", matrix_to_json(r.rotation)},
              {"translation", vec_to_json(r.translation)},
              {"rms_residual", r.rms_residual},
              {"initial_cost", r.initial_cost},
              {"final_cost", r.final_cost},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"observability", r.observability},
              {"frames", r.frames},
              {"config", r.config},
              {"version", r.version}};
}

ResultFile read_result_file(const fs::path& path) {
  const std::string p = path.string();
  const Json j = read_json(path);
  Fields f(j, p, "result");
  ResultFile r;
  r.rotation = matrix_from(f, "rotation");
  if (!is_rotation(r.rotation, 1e-9)) f.fail("rotation is not orthonormal");
  r.translation = f.vec3("translation");
  r.rms_residual = f.number("rms_residual");
  r.initial_cost = f.number("initial_cost");
  r.final_cost = f.number("final_cost");
  r.iterations = static_cast<int>(f.integer("iterations"));
  r.converged = f.boolean("converged");
  r.observability = f.at("observability");
  r.frames = f.at("frames");
  r.config = f.at("config");
  r.version = f.string("version");
  f.finish();
  return r;
}

void write_result_file(const fs::path& path, const ResultFile& r) {
  write_text_atomic(path, dump_canonical(to_json(r)));
}

SceneFile scene_from_json(const Json& j, const std::string& path) {
  Fields f(j, path, "scene");
  SceneFile out;
  const std::string preset = j.contains("preset") ? f.string("preset") : "room";
  if (preset == "room") {
    out.spec = synth::room_preset();
  } else if (preset == "board_only") {
    out.spec = synth::board_only_preset();
  } else {
    f.fail("unknown preset '" + preset + "'");
  }
  auto& s = out.spec;
  if (j.contains("seed")) s.seed = f.unsigned_integer("seed");
  if (j.contains("board_present")) s.board_present = f.boolean("board_present");
  f.optional_number("orientation_spread_deg", out.orientation_spread_deg);
  if (j.contains("board_spec")) s.board = board_spec_from_json(f.at("board_spec"), path);
  if (j.contains("ground_truth")) {
    s.ground_truth = transform_from_json(f.at("ground_truth"), path);
  }
  if (j.contains("lidar")) {
    Fields l(f.at("lidar"), path, "lidar");
    l.optional_number("azimuth_fov_deg", s.lidar.azimuth_fov_deg);
    l.optional_number("elevation_fov_deg", s.lidar.elevation_fov_deg);
    l.optional_number("azimuth_resolution_deg", s.lidar.azimuth_resolution_deg);
    l.optional_number("elevation_resolution_deg", s.lidar.elevation_resolution_deg);
    l.optional_number("range_noise", s.lidar.range_noise);
    l.optional_number("min_range", s.lidar.min_range);
    l.optional_number("max_range", s.lidar.max_range);
    l.finish();
  }
  if (j.contains("camera")) {
    Fields c(f.at("camera"), path, "camera");
    if (j.at("camera").contains("intrinsics")) {
      s.camera.intrinsics = intrinsics_from_json(c.at("intrinsics"), path);
    }
    c.optional_number("pixel_noise", s.camera.pixel_noise);
    c.finish();
  }
  if (j.contains("placement")) {
    Fields p(f.at("placement"), path, "placement");
    p.optional_number("distance", s.placement.distance);
    p.optional_number("lateral_jitter", s.placement.lateral_jitter);
    p.optional_number("depth_jitter", s.placement.depth_jitter);
    p.optional_number("max_tilt_deg", s.placement.max_tilt_deg);
    p.optional_number("max_roll_deg", s.placement.max_roll_deg);
    p.finish();
  }
  if (j.contains("clutter")) {
    const Json& c = f.at("clutter");
    if (!c.is_array()) f.fail("clutter must be an array");
    s.clutter.clear();
    for (const auto& e : c) s.clutter.push_back(primitive_from_json(e, path));
  }
  f.finish();
  try {
    s.validate();
  } catch (const Error& e) {
    f.fail(e.what());
  }
  return out;
}

SceneFile read_scene_file(const fs::path& path) {
  return scene_from_json(read_json(path), path.string());
}

Json to_json(const SceneFile& sf) {
  const auto& s = sf.spec;
  Json clutter = Json::array();
  for (const auto& p : s.clutter) clutter.push_back(primitive_to_json(p));
  return Json{
      {"seed", s.seed},
      {"board_present", s.board_present},
      {"orientation_spread_deg", sf.orientation_spread_deg},
      {"board_spec", to_json(s.board)},
      {"ground_truth", to_json(s.ground_truth)},
      {"lidar", Json{{"azimuth_fov_deg", s.lidar.azimuth_fov_deg},
                     {"elevation_fov_deg", s.lidar.elevation_fov_deg},
                     {"azimuth_resolution_deg", s.lidar.azimuth_resolution_deg},
                     {"elevation_resolution_deg", s.lidar.elevation_resolution_deg},
                     {"range_noise", s.lidar.range_noise},
                     {"min_range", s.lidar.min_range},
                     {"max_range", s.lidar.max_range}}},
      {"camera", Json{{"intrinsics", to_json(s.camera.intrinsics)},
                      {"pixel_noise", s.camera.pixel_noise}}},
      {"placement", Json{{"distance", s.placement.distance},
                         {"lateral_jitter", s.placement.lateral_jitter},
                         {"depth_jitter", s.placement.depth_jitter},
                         {"max_tilt_deg", s.placement.max_tilt_deg},
                         {"max_roll_deg", s.placement.max_roll_deg}}},
      {"clutter", clutter}};
}

}  // namespace yoco::io
