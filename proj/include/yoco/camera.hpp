#pragma once

// Pinhole camera helpers: checkerboard pose from detected corners and the
// similar-triangles distance prior used to pick the board plane in LiDAR data.

#include <Eigen/Core>

#include <span>
#include <vector>

#include "yoco/geometry.hpp"

namespace yoco {

using Pixel = Eigen::Vector2d;

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int image_width = 0;
  int image_height = 0;

  /// Throws InvalidArgument unless fx, fy > 0 and the principal point lies
  /// inside the image.
  void validate() const;

  /// Scalar focal length used by the distance prior.
  double focal() const noexcept { return 0.5 * (fx + fy); }

  bool contains(const Pixel& px) const noexcept {
    return px.x() >= 0.0 && px.y() >= 0.0 && px.x() <= image_width &&
           px.y() <= image_height;
  }
};

/// Checkerboard geometry. `rows` and `cols` count interior corners.
struct BoardSpec {
  int rows = 0;
  int cols = 0;
  double square_size = 0.0;  // meters

  void validate() const;
  int corner_count() const noexcept { return rows * cols; }

  /// Corner k = row * cols + col sits at (col * s, row * s, 0) in the board
  /// (world) frame.
  Point3 world_corner(int row, int col) const {
    return {col * square_size, row * square_size, 0.0};
  }
  std::vector<Point3> world_corners() const;

  /// Physical board outline in the world frame, one square of margin around
  /// the interior corners: x in [-s, cols*s], y in [-s, rows*s].
  Eigen::Vector2d outline_min() const { return {-square_size, -square_size}; }
  Eigen::Vector2d outline_max() const {
    return {cols * square_size, rows * square_size};
  }
  Point3 center() const {
    return {0.5 * (cols - 1) * square_size, 0.5 * (rows - 1) * square_size, 0.0};
  }
};

/// Row-major corner pixels, one per interior corner.
using CornerObservations = std::vector<Pixel>;

struct BoardPose {
  RigidTransform transform;  // camera -> world (R_WC, t_WC)
  double residual_px = 0.0;  // mean corner reprojection residual
};

/// u = fx*x/z + cx, v = fy*y/z + cy. Throws BehindCameraError for z <= 0.
Pixel project_point(const CameraIntrinsics& k, const Point3& p_camera);

/// Checks count and image bounds. Throws InvalidArgument.
void validate_corners(const CameraIntrinsics& k, const BoardSpec& spec,
                      std::span<const Pixel> corners);

/// Normalized DLT homography mapping plane coordinates to pixels.
/// Throws PoseEstimationError when the system is rank deficient.
Eigen::Matrix3d estimate_homography(std::span<const Eigen::Vector2d> plane,
                                    std::span<const Pixel> pixels);

/// Board pose from corners: homography, decomposition with the known
/// intrinsics, then Levenberg-Marquardt refinement of the corner
/// reprojection error.
BoardPose estimate_board_pose(const CameraIntrinsics& k, const BoardSpec& spec,
                              std::span<const Pixel> corners);

/// Distance prior l = f * w' / w, taken as the median over all horizontally
/// and vertically adjacent corner pairs (w' = square size).
/// Throws DegenerateError when any adjacent pair is closer than 1 px.
double estimate_board_distance(const CameraIntrinsics& k, const BoardSpec& spec,
                               std::span<const Pixel> corners);

/// Projects the board corners through `camera_to_world`'s inverse.
CornerObservations synthesize_corners(const CameraIntrinsics& k,
                                      const BoardSpec& spec,
                                      const RigidTransform& camera_to_world);

}  // namespace yoco
