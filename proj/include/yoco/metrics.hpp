#pragma once

/**
 * @file metrics.hpp
 * @brief Calibration error metrics and reprojection rendering.
 *
 * Euler angles use the Z-Y-X convention: R = Rz(yaw) * Ry(pitch) * Rx(roll).
 * Per-axis rotation errors depend on that choice; the geodesic angle does not.
 */

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "yoco/camera.hpp"
#include "yoco/geometry.hpp"

namespace yoco {

struct EulerZYX {
  double roll = 0.0;   // about x, radians
  double pitch = 0.0;  // about y
  double yaw = 0.0;    // about z
};

struct CalibrationErrors {
  double rotation_error_deg = 0.0;
  double translation_error_m = 0.0;
  std::array<double, 3> per_axis_rotation{};     // |d roll|, |d pitch|, |d yaw| in degrees
  std::array<double, 3> per_axis_translation{};  // |dx|, |dy|, |dz| in meters
};

/// @brief Z-Y-X Euler decomposition; pitch in [-pi/2, pi/2].
EulerZYX euler_zyx(const Matrix3& r);

/// @brief Inverse of euler_zyx.
Matrix3 from_euler_zyx(const EulerZYX& e);

/// @brief Geodesic angle between two rotations in degrees.
double rotation_error(const Matrix3& estimated, const Matrix3& truth);

/// @brief Per-axis absolute Euler differences in degrees, wrapped to [0, 180].
std::array<double, 3> per_axis_rotation_error(const Matrix3& estimated, const Matrix3& truth);

/// @brief Euclidean distance between translations in meters.
double translation_error(const Vector3& estimated, const Vector3& truth);

/// @brief All error components for an estimated LiDAR -> camera transform.
CalibrationErrors calibration_errors(const RigidTransform& estimated, const RigidTransform& truth);

/// @brief Pixel distance between the projection of `center_lidar` through
/// `lidar_to_camera` and `observed`. Throws BehindCameraError.
double reprojection_error(const Point3& center_lidar, const RigidTransform& lidar_to_camera,
                          const CameraIntrinsics& k, const Pixel& observed);

/// @brief Interleaved 8-bit RGB raster, row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int w, int h);
  std::array<std::uint8_t, 3> at(int x, int y) const;
  void set(int x, int y, const std::array<std::uint8_t, 3>& rgb);
  bool is_blank() const;
};

struct RenderOptions {
  double min_depth = 0.5;   // meters, maps to the first colormap entry
  double max_depth = 10.0;  // meters, maps to the last
  int splat_radius = 0;     // pixels; 0 paints a single pixel
};

/// @brief Colormap used for depth splats. `t` is clamped to [0, 1].
std::array<std::uint8_t, 3> depth_color(double t);

/// @brief Splats every point with z > 0 in the camera frame into `canvas`.
/// Nearer points win where splats overlap. Returns the number of points drawn.
std::size_t render_reprojection(const PointCloud& cloud, const RigidTransform& lidar_to_camera,
                                const CameraIntrinsics& k, Image& canvas,
                                const RenderOptions& opts = {});

/// @brief Renders into a blank image of the intrinsics' size.
Image render_reprojection(const PointCloud& cloud, const RigidTransform& lidar_to_camera,
                          const CameraIntrinsics& k, const RenderOptions& opts = {});

/// @brief Writes an 8-bit RGB PNG. Throws IoError.
void write_png(const Image& image, const std::filesystem::path& path);

/// @brief Reads an 8-bit RGB or RGBA PNG (alpha dropped). Throws IoError.
Image read_png(const std::filesystem::path& path);

}  // namespace yoco
