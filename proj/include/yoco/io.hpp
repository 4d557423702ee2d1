#pragma once

// File formats shared by the command-line tools.
//
//  * Point files: ASCII "x y z" per line, '#' comments, or ASCII PLY.
//  * JSON documents: keys sorted, floating values rounded to 12 significant
//    digits, two-space indent, trailing newline. Writing a parsed document
//    again reproduces it byte for byte.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "yoco/camera.hpp"
#include "yoco/extraction.hpp"
#include "yoco/geometry.hpp"
#include "yoco/optimizer.hpp"
#include "yoco/synth.hpp"

namespace yoco::io {

using Json = nlohmann::json;

inline constexpr const char* kToolVersion = "1.0.0";

/// Rounds to 12 significant digits.
double round_sig12(double x);

/// Canonical text of a document (see file comment).
std::string dump_canonical(const Json& doc);

/// Writes through a temporary sibling file and renames it into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
Json read_json(const std::filesystem::path& path);

// Point files.
PointCloud read_point_file(const std::filesystem::path& path);
void write_point_file(const std::filesystem::path& path, const PointCloud& cloud);
std::vector<int> read_label_file(const std::filesystem::path& path);
void write_label_file(const std::filesystem::path& path, const std::vector<int>& labels);

// Value conversions. The from_json variants throw ParseError naming `path`.
Json to_json(const RigidTransform& t);
RigidTransform transform_from_json(const Json& j, const std::string& path);
Json to_json(const CameraIntrinsics& k);
CameraIntrinsics intrinsics_from_json(const Json& j, const std::string& path);
Json to_json(const BoardSpec& b);
BoardSpec board_spec_from_json(const Json& j, const std::string& path);
Json to_json(const ExtractionDiagnostics& d);
Json to_json(const ObservabilityReport& r);

/// Effective configuration of a run.
struct Config {
  ExtractionParams extraction;
  SolverOptions solver;
  std::uint64_t seed = 0;
  int jobs = 1;
};

Json to_json(const Config& c);
/// Applies the keys present in `j` on top of `base`. Unknown keys are errors.
Config config_from_json(const Json& j, const std::string& path, Config base = {});
Config read_params_file(const std::filesystem::path& path);

/// One calibration frame on disk: exactly one of corners / board_pose.
struct FrameFile {
  std::filesystem::path cloud;  // as written; relative to the frame file
  CameraIntrinsics intrinsics;
  BoardSpec board_spec;
  std::optional<CornerObservations> corners;
  std::optional<RigidTransform> board_pose;  // camera -> world

  /// Cloud path resolved against the directory of `frame_path`.
  std::filesystem::path resolve_cloud(const std::filesystem::path& frame_path) const;
};

Json to_json(const FrameFile& f);
FrameFile read_frame_file(const std::filesystem::path& path);
void write_frame_file(const std::filesystem::path& path, const FrameFile& f);

struct GroundTruthFile {
  RigidTransform lidar_to_camera;
  std::vector<RigidTransform> board_poses;  // world -> camera, per frame
};

GroundTruthFile read_ground_truth_file(const std::filesystem::path& path);
void write_ground_truth_file(const std::filesystem::path& path, const GroundTruthFile& g);

struct ResultFile {
  Matrix3 rotation = Matrix3::Identity();  // row-major on disk
  Vector3 translation = Vector3::Zero();
  double rms_residual = 0.0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  Json observability = Json::object();
  Json frames = Json::array();  // per-frame diagnostics
  Json config = Json::object();
  std::string version = kToolVersion;

  /// LiDAR -> camera transform, re-orthonormalized.
  RigidTransform transform() const;
};

Json to_json(const ResultFile& r);
/// Throws ParseError when the rotation fails the orthonormality check.
ResultFile read_result_file(const std::filesystem::path& path);
void write_result_file(const std::filesystem::path& path, const ResultFile& r);

/// Scene description for the simulator: a preset ("room" or "board_only")
/// with optional overrides.
struct SceneFile {
  synth::SceneSpec spec;
  double orientation_spread_deg = 30.0;
};

SceneFile scene_from_json(const Json& j, const std::string& path);
SceneFile read_scene_file(const std::filesystem::path& path);
Json to_json(const SceneFile& s);

}  // namespace yoco::io
