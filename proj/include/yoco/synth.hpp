#pragma once

// Deterministic ground-truth scene generator. A LiDAR is simulated by ray
// casting a fixed azimuth/elevation grid against analytic primitives; range
// noise is applied along each ray. Camera observations are the projected
// checkerboard corners plus pixel noise.
//
// Sensor convention for both LiDAR and camera: x right, y down, z forward.
// Clutter primitives are placed in the LiDAR frame.

#include <cstdint>
#include <string>
#include <vector>

#include "yoco/camera.hpp"
#include "yoco/geometry.hpp"
#include "yoco/optimizer.hpp"

namespace yoco::synth {

enum class PrimitiveKind { kRectangle, kBox, kSphere, kDisk };

std::string_view to_string(PrimitiveKind kind);
PrimitiveKind primitive_kind_from_string(std::string_view name);

/// An analytic surface in the LiDAR frame. `orientation` columns are the
/// local axes; rectangles and disks lie in the local x-y plane.
struct Primitive {
  std::string name;
  PrimitiveKind kind = PrimitiveKind::kRectangle;
  Point3 center = Point3::Zero();
  Matrix3 orientation = Matrix3::Identity();
  /// Rectangle: half sizes (x, y). Box: half sizes (x, y, z).
  /// Sphere and disk: radius in x.
  Vector3 extent = Vector3::Zero();
};

struct LidarModel {
  double azimuth_fov_deg = 100.0;
  double elevation_fov_deg = 50.0;
  double azimuth_resolution_deg = 0.4;
  double elevation_resolution_deg = 0.4;
  double range_noise = 0.0;  // meters, 1 sigma along the ray
  double min_range = 0.1;
  double max_range = 30.0;
};

struct CameraModel {
  CameraIntrinsics intrinsics{800.0, 800.0, 640.0, 480.0, 1280, 960};
  double pixel_noise = 0.0;  // pixels, 1 sigma per coordinate
};

/// Board pose sampling used by generate_suite.
struct BoardPlacement {
  double distance = 2.0;         // board center depth in the camera frame
  double lateral_jitter = 0.1;   // uniform +- meters in x and y
  double depth_jitter = 0.1;     // uniform +- meters in z
  double max_tilt_deg = 25.0;    // normal cone around the optical axis
  double max_roll_deg = 10.0;    // in-plane rotation
};

struct SceneSpec {
  BoardSpec board{7, 9, 0.1};
  /// World (board) -> camera, one per frame.
  std::vector<RigidTransform> board_poses;
  bool board_present = true;
  std::vector<Primitive> clutter;
  LidarModel lidar;
  CameraModel camera;
  RigidTransform ground_truth;  // LiDAR -> camera
  BoardPlacement placement;
  std::uint64_t seed = 0;

  void validate() const;
};

constexpr int kBoardLabel = 0;

/// Label of clutter primitive i is i + 1.
constexpr int clutter_label(std::size_t i) { return static_cast<int>(i) + 1; }

struct LabeledFrame {
  PointCloud cloud;              // full LiDAR scan
  std::vector<int> labels;       // one per point
  CornerObservations corners;    // observed (noisy)
  CornerObservations true_corners;
  RigidTransform true_board_pose;  // camera -> world
  std::size_t index = 0;

  /// Points labelled as board, in scan order.
  PointCloud board_points() const;
};

/// Default extrinsic used by the presets: about 5 deg of rotation and a
/// 0.1 m offset.
RigidTransform default_ground_truth();

/// Fronto-parallel board at 2 m with no clutter.
SceneSpec board_only_preset();

/// Board plus floor, right and back walls, a smaller distractor panel
/// parallel to the board whose centroid range is within the default
/// selection tolerance of the board's, and three spheres.
SceneSpec room_preset();

/// Ray-casts frame `board_pose_index`. Throws BoardNotVisibleError when the
/// board is missed by the LiDAR or any corner leaves the image, and
/// InvalidArgument for a bad index.
LabeledFrame generate_frame(const SceneSpec& spec, std::size_t board_pose_index);

/// Samples `n_frames` board poses (seeded) whose normals are pairwise at
/// least `orientation_spread_deg` apart, stores them in `spec.board_poses`
/// and generates every frame. Throws InfeasibleSpreadError when no such set
/// fits within the tilt cone and camera field of view.
std::vector<LabeledFrame> generate_suite(SceneSpec& spec, std::size_t n_frames,
                                         double orientation_spread_deg);

/// Calibration frame built from ground-truth labels and the given pose.
CalibrationFrame labeled_calibration_frame(const LabeledFrame& frame,
                                           const BoardPose& pose);

struct CircleObservation {
  PointCloud points;          // LiDAR returns on the disk
  Point3 true_center_lidar;   // disk center in the LiDAR frame
  Pixel center_pixel;         // true image of the center
};

/// Scans an upright disk of `radius` centered at `center_camera` (camera
/// frame) with everything else removed.
CircleObservation generate_circle_target(const SceneSpec& spec,
                                         const Point3& center_camera,
                                         double radius, std::uint64_t seed);

/// Nearest hit distance along a unit ray from the origin, or a negative
/// value on a miss.
double intersect(const Primitive& primitive, const Vector3& direction);

}  // namespace yoco::synth
