#include "yoco/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "yoco/parallel.hpp"

namespace yoco::synth {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr std::uint64_t kLidarStage = 0x4c494441u;   // "LIDA"
constexpr std::uint64_t kCameraStage = 0x43414d45u;  // "CAME"
constexpr std::uint64_t kSuiteStage = 0x53554954u;   // "SUIT"
constexpr std::size_t kMinBoardReturns = 50;

double intersect_plane_patch(const Primitive& p, const Vector3& d, bool disk) {
  const Vector3 n = p.orientation.col(2);
  const double denom = n.dot(d);
  if (std::abs(denom) < 1e-12) return -1.0;
  const double t = n.dot(p.center) / denom;
  if (t <= 0.0) return -1.0;
  const Vector3 local = p.orientation.transpose() * (t * d - p.center);
  if (disk) {
    return local.head<2>().norm() <= p.extent.x() ? t : -1.0;
  }
  return (std::abs(local.x()) <= p.extent.x() && std::abs(local.y()) <= p.extent.y())
             ? t
             : -1.0;
}

double intersect_sphere(const Primitive& p, const Vector3& d) {
  // |t d - c|^2 = r^2 with |d| = 1.
  const double b = d.dot(p.center);
  const double c = p.center.squaredNorm() - p.extent.x() * p.extent.x();
  const double disc = b * b - c;
  if (disc < 0.0) return -1.0;
  const double s = std::sqrt(disc);
  if (b - s > 0.0) return b - s;
  if (b + s > 0.0) return b + s;
  return -1.0;
}

double intersect_box(const Primitive& p, const Vector3& d) {
  const Vector3 o = p.orientation.transpose() * (-p.center);
  const Vector3 dl = p.orientation.transpose() * d;
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dl[a]) < 1e-15) {
      if (std::abs(o[a]) > p.extent[a]) return -1.0;
      continue;
    }
    double t1 = (-p.extent[a] - o[a]) / dl[a];
    double t2 = (p.extent[a] - o[a]) / dl[a];
    if (t1 > t2) std::swap(t1, t2);
    t_near = std::max(t_near, t1);
    t_far = std::min(t_far, t2);
    if (t_near > t_far) return -1.0;
  }
  if (t_near > 0.0) return t_near;
  if (t_far > 0.0) return t_far;
  return -1.0;
}

Primitive board_primitive(const SceneSpec& spec, const RigidTransform& world_to_camera) {
  const RigidTransform world_to_lidar =
      compose(invert(spec.ground_truth), world_to_camera);
  const Eigen::Vector2d lo = spec.board.outline_min();
  const Eigen::Vector2d hi = spec.board.outline_max();
  Primitive board;
  board.name = "board";
  board.kind = PrimitiveKind::kRectangle;
  board.center = world_to_lidar * Point3(0.5 * (lo.x() + hi.x()), 0.5 * (lo.y() + hi.y()), 0.0);
  board.orientation = world_to_lidar.rotation();
  board.extent = Vector3(0.5 * (hi.x() - lo.x()), 0.5 * (hi.y() - lo.y()), 0.0);
  return board;
}

struct Grid {
  int azimuth_count;
  int elevation_count;
};

Grid grid_size(const LidarModel& m) {
  return {static_cast<int>(std::floor(m.azimuth_fov_deg / m.azimuth_resolution_deg + 1e-9)) + 1,
          static_cast<int>(std::floor(m.elevation_fov_deg / m.elevation_resolution_deg + 1e-9)) + 1};
}

Vector3 ray_direction(double azimuth_rad, double elevation_rad) {
  return {std::cos(elevation_rad) * std::sin(azimuth_rad), -std::sin(elevation_rad),
          std::cos(elevation_rad) * std::cos(azimuth_rad)};
}

// Casts the full grid against `prims`; label[i] of each hit is the index of
// the primitive hit.
void cast(const LidarModel& m, const std::vector<const Primitive*>& prims,
          std::uint64_t seed, PointCloud& cloud, std::vector<int>& hit_prim) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const Grid g = grid_size(m);
  cloud.frame = Frame::kLiDAR;
  cloud.points.clear();
  hit_prim.clear();
  for (int ei = 0; ei < g.elevation_count; ++ei) {
    const double e = (0.5 * m.elevation_fov_deg - ei * m.elevation_resolution_deg) * kDegToRad;
    for (int ai = 0; ai < g.azimuth_count; ++ai) {
      const double a = (-0.5 * m.azimuth_fov_deg + ai * m.azimuth_resolution_deg) * kDegToRad;
      const Vector3 d = ray_direction(a, e);
      double best = std::numeric_limits<double>::infinity();
      int best_prim = -1;
      for (std::size_t k = 0; k < prims.size(); ++k) {
        const double t = intersect(*prims[k], d);
        if (t > 0.0 && t < best) {
          best = t;
          best_prim = static_cast<int>(k);
        }
      }
      if (best_prim < 0 || best < m.min_range || best > m.max_range) continue;
      const double range = m.range_noise > 0.0 ? best + m.range_noise * noise(rng) : best;
      cloud.points.push_back(range * d);
      hit_prim.push_back(best_prim);
    }
  }
}

Matrix3 rotation_about(const Vector3& axis, double angle_rad) {
  return axis_angle_to_matrix(AxisAngle{UnitVector3(axis), angle_rad});
}

Primitive make_rect(std::string name, const Point3& center, const Matrix3& orientation,
                    double half_x, double half_y) {
  return Primitive{std::move(name), PrimitiveKind::kRectangle, center, orientation,
                   Vector3(half_x, half_y, 0.0)};
}

Primitive make_sphere(std::string name, const Point3& center, double radius) {
  return Primitive{std::move(name), PrimitiveKind::kSphere, center, Matrix3::Identity(),
                   Vector3(radius, 0.0, 0.0)};
}

RigidTransform fronto_parallel_pose(const BoardSpec& board, double distance) {
  // World z along the optical axis, board center on the axis.
  const Point3 c = board.center();
  return RigidTransform(Matrix3::Identity(), Vector3(-c.x(), -c.y(), distance),
                        Frame::kWorld, Frame::kCamera);
}

bool corners_visible(const SceneSpec& spec, const RigidTransform& world_to_camera) {
  for (const auto& w : spec.board.world_corners()) {
    const Point3 pc = world_to_camera * w;
    if (pc.z() <= 0.0) return false;
    if (!spec.camera.intrinsics.contains(project_point(spec.camera.intrinsics, pc))) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::string_view to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::kRectangle:
      return "rectangle";
    case PrimitiveKind::kBox:
      return "box";
    case PrimitiveKind::kSphere:
      return "sphere";
    case PrimitiveKind::kDisk:
      return "disk";
  }
  return "unknown";
}

PrimitiveKind primitive_kind_from_string(std::string_view name) {
  if (name == "rectangle") return PrimitiveKind::kRectangle;
  if (name == "box") return PrimitiveKind::kBox;
  if (name == "sphere") return PrimitiveKind::kSphere;
  if (name == "disk") return PrimitiveKind::kDisk;
  throw InvalidArgument("unknown primitive kind '" + std::string(name) + "'");
}

double intersect(const Primitive& primitive, const Vector3& direction) {
  switch (primitive.kind) {
    case PrimitiveKind::kRectangle:
      return intersect_plane_patch(primitive, direction, false);
    case PrimitiveKind::kDisk:
      return intersect_plane_patch(primitive, direction, true);
    case PrimitiveKind::kSphere:
      return intersect_sphere(primitive, direction);
    case PrimitiveKind::kBox:
      return intersect_box(primitive, direction);
  }
  return -1.0;
}

void SceneSpec::validate() const {
  board.validate();
  camera.intrinsics.validate();
  if (!(lidar.azimuth_resolution_deg > 0.0) || !(lidar.elevation_resolution_deg > 0.0)) {
    throw InvalidArgument("lidar resolutions must be positive");
  }
  if (!(lidar.azimuth_fov_deg > 0.0) || !(lidar.elevation_fov_deg > 0.0) ||
      lidar.azimuth_fov_deg >= 360.0 || lidar.elevation_fov_deg >= 180.0) {
    throw InvalidArgument("lidar field of view out of range");
  }
  if (lidar.range_noise < 0.0 || camera.pixel_noise < 0.0) {
    throw InvalidArgument("noise sigmas must be non-negative");
  }
  if (!(lidar.max_range > lidar.min_range)) {
    throw InvalidArgument("lidar max_range must exceed min_range");
  }
  if (ground_truth.source() != Frame::kLiDAR || ground_truth.target() != Frame::kCamera) {
    throw FrameMismatchError("ground truth must map lidar -> camera");
  }
  for (const auto& p : board_poses) {
    if (p.source() != Frame::kWorld || p.target() != Frame::kCamera) {
      throw FrameMismatchError("board poses must map world -> camera");
    }
  }
  for (const auto& c : clutter) {
    if (!is_rotation(c.orientation)) {
      throw InvalidArgument("primitive '" + c.name + "' has an invalid orientation");
    }
  }
}

PointCloud LabeledFrame::board_points() const {
  PointCloud out;
  out.frame = cloud.frame;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (labels[i] == kBoardLabel) out.points.push_back(cloud.points[i]);
  }
  return out;
}

RigidTransform default_ground_truth() {
  const Matrix3 r = rotation_about(Vector3(1.0, 2.0, 3.0), 5.0 * kDegToRad);
  return RigidTransform(r, Vector3(0.08, -0.06, 0.0), Frame::kLiDAR, Frame::kCamera);
}

SceneSpec board_only_preset() {
  SceneSpec spec;
  spec.ground_truth = default_ground_truth();
  spec.board_poses = {fronto_parallel_pose(spec.board, spec.placement.distance)};
  return spec;
}

SceneSpec room_preset() {
  SceneSpec spec = board_only_preset();
  const Matrix3 facing = Matrix3::Identity();  // normal along +z
  const Matrix3 floor = rotation_about(Vector3::UnitX(), 0.5 * std::numbers::pi);
  const Matrix3 side = rotation_about(Vector3::UnitY(), 0.5 * std::numbers::pi);
  spec.clutter = {
      make_rect("floor", Point3(0.0, 1.2, 5.0), floor, 8.0, 8.0),
      make_rect("wall_right", Point3(2.6, -0.5, 5.0), side, 8.0, 2.0),
      make_rect("wall_back", Point3(0.0, -0.5, 6.5), facing, 8.0, 2.0),
      make_rect("distractor", Point3(-1.25, 0.35, 1.45), facing, 0.3, 0.3),
      make_sphere("sphere_0", Point3(0.9, 0.5, 1.2), 0.15),
      make_sphere("sphere_1", Point3(-0.8, 0.8, 3.4), 0.25),
      make_sphere("sphere_2", Point3(1.5, -0.3, 3.8), 0.2),
  };
  return spec;
}

LabeledFrame generate_frame(const SceneSpec& spec, std::size_t index) {
  spec.validate();
  if (index >= spec.board_poses.size()) {
    throw InvalidArgument("board pose index " + std::to_string(index) + " out of range");
  }
  const RigidTransform& world_to_camera = spec.board_poses[index];

  LabeledFrame frame;
  frame.index = index;
  frame.true_board_pose = invert(world_to_camera);

  std::vector<const Primitive*> prims;
  const Primitive board = board_primitive(spec, world_to_camera);
  if (spec.board_present) prims.push_back(&board);
  for (const auto& c : spec.clutter) prims.push_back(&c);

  std::vector<int> hit;
  cast(spec.lidar, prims, derive_seed(spec.seed, kLidarStage, index), frame.cloud, hit);
  frame.labels.resize(hit.size());
  std::size_t board_hits = 0;
  for (std::size_t i = 0; i < hit.size(); ++i) {
    const auto k = static_cast<std::size_t>(hit[i]);
    if (spec.board_present) {
      frame.labels[i] = k == 0 ? kBoardLabel : clutter_label(k - 1);
    } else {
      frame.labels[i] = clutter_label(k);
    }
    if (frame.labels[i] == kBoardLabel) ++board_hits;
  }
  if (spec.board_present && board_hits < kMinBoardReturns) {
    throw BoardNotVisibleError("board " + std::to_string(index) + " has only " +
                               std::to_string(board_hits) + " lidar returns");
  }

  if (!corners_visible(spec, world_to_camera)) {
    throw BoardNotVisibleError("board " + std::to_string(index) +
                               " is not fully inside the image");
  }
  frame.true_corners = synthesize_corners(spec.camera.intrinsics, spec.board,
                                          frame.true_board_pose);
  frame.corners = frame.true_corners;
  if (spec.camera.pixel_noise > 0.0) {
    std::mt19937_64 rng(derive_seed(spec.seed, kCameraStage, index));
    std::normal_distribution<double> noise(0.0, spec.camera.pixel_noise);
    for (auto& c : frame.corners) {
      c.x() += noise(rng);
      c.y() += noise(rng);
    }
    for (const auto& c : frame.corners) {
      if (!spec.camera.intrinsics.contains(c)) {
        throw BoardNotVisibleError("noisy corner left the image");
      }
    }
  }
  return frame;
}

std::vector<LabeledFrame> generate_suite(SceneSpec& spec, std::size_t n_frames,
                                         double spread_deg) {
  spec.validate();
  if (n_frames < 1) throw InvalidArgument("n_frames must be at least 1");
  const BoardPlacement& pl = spec.placement;
  if (n_frames >= 2 && spread_deg > 2.0 * pl.max_tilt_deg) {
    throw InfeasibleSpreadError("a spread of " + std::to_string(spread_deg) +
                                " deg cannot fit in a tilt cone of " +
                                std::to_string(pl.max_tilt_deg) + " deg");
  }

  std::mt19937_64 rng(derive_seed(spec.seed, kSuiteStage, n_frames));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double cos_max = std::cos(pl.max_tilt_deg * kDegToRad);
  const double cos_spread = std::cos(spread_deg * kDegToRad);
  const Point3 board_center = spec.board.center();
  const RigidTransform camera_to_lidar = invert(spec.ground_truth);
  const double half_az = 0.5 * spec.lidar.azimuth_fov_deg * kDegToRad;
  const double half_el = 0.5 * spec.lidar.elevation_fov_deg * kDegToRad;

  constexpr int kRestarts = 50;
  constexpr int kAttemptsPerRestart = 4000;
  for (int restart = 0; restart < kRestarts; ++restart) {
    std::vector<RigidTransform> poses;
    std::vector<Vector3> normals;
    for (int attempt = 0; attempt < kAttemptsPerRestart && poses.size() < n_frames;
         ++attempt) {
      const double cos_t = 1.0 - unit(rng) * (1.0 - cos_max);
      const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
      const double phi = 2.0 * std::numbers::pi * unit(rng);
      const Vector3 n(sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t);
      const double roll = (2.0 * unit(rng) - 1.0) * pl.max_roll_deg * kDegToRad;
      const Point3 center((2.0 * unit(rng) - 1.0) * pl.lateral_jitter,
                          (2.0 * unit(rng) - 1.0) * pl.lateral_jitter,
                          pl.distance + (2.0 * unit(rng) - 1.0) * pl.depth_jitter);

      const bool spread_ok = std::all_of(normals.begin(), normals.end(), [&](const Vector3& m) {
        return m.dot(n) <= cos_spread;
      });
      if (!spread_ok) continue;

      Vector3 x_axis = Vector3::UnitX() - Vector3::UnitX().dot(n) * n;
      x_axis = rotation_about(n, roll) * x_axis.normalized();
      Matrix3 r;
      r.col(0) = x_axis;
      r.col(1) = n.cross(x_axis);
      r.col(2) = n;
      const RigidTransform pose = RigidTransform::orthonormalized(
          r, center - project_to_rotation(r) * board_center, Frame::kWorld, Frame::kCamera);

      if (!corners_visible(spec, pose)) continue;
      const Point3 c_lidar = camera_to_lidar * center;
      if (std::abs(std::atan2(c_lidar.x(), c_lidar.z())) > half_az ||
          std::abs(std::atan2(-c_lidar.y(), std::hypot(c_lidar.x(), c_lidar.z()))) > half_el) {
        continue;
      }
      poses.push_back(pose);
      normals.push_back(n);
    }
    if (poses.size() == n_frames) {
      spec.board_poses = std::move(poses);
      std::vector<LabeledFrame> frames(n_frames);
      parallel_for(n_frames, 1, [&](std::size_t i) { frames[i] = generate_frame(spec, i); });
      return frames;
    }
  }
  throw InfeasibleSpreadError("could not place " + std::to_string(n_frames) +
                              " boards pairwise " + std::to_string(spread_deg) +
                              " deg apart within the camera view");
}

CalibrationFrame labeled_calibration_frame(const LabeledFrame& frame, const BoardPose& pose) {
  return CalibrationFrame{frame.board_points(), pose};
}

CircleObservation generate_circle_target(const SceneSpec& spec, const Point3& center_camera,
                                         double radius, std::uint64_t seed) {
  spec.validate();
  const RigidTransform camera_to_lidar = invert(spec.ground_truth);
  Primitive disk;
  disk.name = "circle";
  disk.kind = PrimitiveKind::kDisk;
  disk.center = camera_to_lidar * center_camera;
  disk.orientation = Matrix3::Identity();
  disk.extent = Vector3(radius, 0.0, 0.0);

  CircleObservation obs;
  std::vector<int> hit;
  cast(spec.lidar, {&disk}, seed, obs.points, hit);
  if (obs.points.empty()) {
    throw BoardNotVisibleError("circle target produced no lidar returns");
  }
  obs.true_center_lidar = disk.center;
  obs.center_pixel = project_point(spec.camera.intrinsics, center_camera);
  return obs;
}

}  // namespace yoco::synth
