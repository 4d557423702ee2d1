#include "yoco/metrics.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <limits>
#include <memory>
#include <numbers>

#include "yoco/errors.hpp"

namespace yoco {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double wrapped_abs_deg(double a, double b) {
  double d = std::remainder(a - b, 2.0 * std::numbers::pi);
  return std::abs(d) * kRadToDeg;
}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

EulerZYX euler_zyx(const Matrix3& r) {
  EulerZYX e;
  e.pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  if (std::abs(r(2, 0)) < 1.0 - 1e-12) {
    e.roll = std::atan2(r(2, 1), r(2, 2));
    e.yaw = std::atan2(r(1, 0), r(0, 0));
  } else {
    // Gimbal lock: fold the whole rotation about z into yaw.
    e.roll = 0.0;
    e.yaw = std::atan2(-r(0, 1), r(1, 1));
  }
  return e;
}

Matrix3 from_euler_zyx(const EulerZYX& e) {
  const Eigen::AngleAxisd rz(e.yaw, Vector3::UnitZ());
  const Eigen::AngleAxisd ry(e.pitch, Vector3::UnitY());
  const Eigen::AngleAxisd rx(e.roll, Vector3::UnitX());
  return (rz * ry * rx).toRotationMatrix();
}

double rotation_error(const Matrix3& estimated, const Matrix3& truth) {
  const double c = std::clamp(((estimated * truth.transpose()).trace() - 1.0) / 2.0, -1.0, 1.0);
  // acos loses precision near 0; the log map is accurate there.
  if (c > 0.99) return rotation_to_vector(estimated * truth.transpose()).norm() * kRadToDeg;
  return std::acos(c) * kRadToDeg;
}

std::array<double, 3> per_axis_rotation_error(const Matrix3& estimated, const Matrix3& truth) {
  const EulerZYX a = euler_zyx(estimated);
  const EulerZYX b = euler_zyx(truth);
  return {wrapped_abs_deg(a.roll, b.roll), wrapped_abs_deg(a.pitch, b.pitch),
          wrapped_abs_deg(a.yaw, b.yaw)};
}

double translation_error(const Vector3& estimated, const Vector3& truth) {
  return (estimated - truth).norm();
}

CalibrationErrors calibration_errors(const RigidTransform& estimated,
                                     const RigidTransform& truth) {
  if (estimated.source() != truth.source() || estimated.target() != truth.target()) {
    throw FrameMismatchError("estimated and true transforms map different frames");
  }
  CalibrationErrors e;
  e.rotation_error_deg = rotation_error(estimated.rotation(), truth.rotation());
  e.translation_error_m = translation_error(estimated.translation(), truth.translation());
  e.per_axis_rotation = per_axis_rotation_error(estimated.rotation(), truth.rotation());
  const Vector3 d = (estimated.translation() - truth.translation()).cwiseAbs();
  e.per_axis_translation = {d.x(), d.y(), d.z()};
  return e;
}

double reprojection_error(const Point3& center_lidar, const RigidTransform& lidar_to_camera,
                          const CameraIntrinsics& k, const Pixel& observed) {
  if (lidar_to_camera.source() != Frame::kLiDAR || lidar_to_camera.target() != Frame::kCamera) {
    throw FrameMismatchError("reprojection needs a lidar -> camera transform");
  }
  return (project_point(k, lidar_to_camera * center_lidar) - observed).norm();
}

Image::Image(int w, int h) : width(w), height(h) {
  if (w <= 0 || h <= 0) throw InvalidArgument("image size must be positive");
  data.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0);
}

std::array<std::uint8_t, 3> Image::at(int x, int y) const {
  const auto i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)) * 3;
  return {data[i], data[i + 1], data[i + 2]};
}

void Image::set(int x, int y, const std::array<std::uint8_t, 3>& rgb) {
  const auto i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)) * 3;
  data[i] = rgb[0];
  data[i + 1] = rgb[1];
  data[i + 2] = rgb[2];
}

bool Image::is_blank() const {
  return std::all_of(data.begin(), data.end(), [](std::uint8_t v) { return v == 0; });
}

std::array<std::uint8_t, 3> depth_color(double t) {
  // Piecewise-linear jet: red near, blue far. Never pure black.
  t = std::clamp(t, 0.0, 1.0);
  const double s = 1.0 - t;
  const auto channel = [](double v) {
    return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
  };
  const double r = std::min(4.0 * s - 1.5, -4.0 * s + 4.5);
  const double g = std::min(4.0 * s - 0.5, -4.0 * s + 3.5);
  const double b = std::min(4.0 * s + 0.5, -4.0 * s + 2.5);
  return {channel(r), channel(g), channel(b)};
}

std::size_t render_reprojection(const PointCloud& cloud, const RigidTransform& lidar_to_camera,
                                const CameraIntrinsics& k, Image& canvas,
                                const RenderOptions& opts) {
  if (cloud.frame != lidar_to_camera.source()) {
    throw FrameMismatchError("cloud frame does not match the transform source");
  }
  if (opts.splat_radius < 0) throw InvalidArgument("splat radius must be non-negative");
  if (!(opts.max_depth > opts.min_depth)) throw InvalidArgument("max_depth must exceed min_depth");

  std::vector<double> depth(static_cast<std::size_t>(canvas.width) *
                                static_cast<std::size_t>(canvas.height),
                            std::numeric_limits<double>::infinity());
  std::size_t drawn = 0;
  for (const auto& p : cloud.points) {
    const Point3 pc = lidar_to_camera * p;
    if (!(pc.z() > 0.0)) continue;
    const Pixel px = project_point(k, pc);
    const long u = std::lround(std::floor(px.x()));
    const long v = std::lround(std::floor(px.y()));
    if (u < 0 || v < 0 || u >= canvas.width || v >= canvas.height) continue;
    ++drawn;
    const auto color = depth_color((pc.z() - opts.min_depth) / (opts.max_depth - opts.min_depth));
    const int r = opts.splat_radius;
    for (long y = v - r; y <= v + r; ++y) {
      for (long x = u - r; x <= u + r; ++x) {
        if (x < 0 || y < 0 || x >= canvas.width || y >= canvas.height) continue;
        if ((x - u) * (x - u) + (y - v) * (y - v) > r * r) continue;
        const auto i = static_cast<std::size_t>(y) * static_cast<std::size_t>(canvas.width) +
                       static_cast<std::size_t>(x);
        if (pc.z() < depth[i]) {
          depth[i] = pc.z();
          canvas.set(static_cast<int>(x), static_cast<int>(y), color);
        }
      }
    }
  }
  return drawn;
}

Image render_reprojection(const PointCloud& cloud, const RigidTransform& lidar_to_camera,
                          const CameraIntrinsics& k, const RenderOptions& opts) {
  k.validate();
  Image img(k.image_width, k.image_height);
  render_reprojection(cloud, lidar_to_camera, k, img, opts);
  return img;
}

void write_png(const Image& image, const std::filesystem::path& path) {
  if (image.width <= 0 || image.height <= 0) throw InvalidArgument("cannot write an empty image");
  File f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed writing PNG '" + path.string() + "'");
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const auto stride = static_cast<std::size_t>(image.width) * 3;
  for (int y = 0; y < image.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(image.data.data() + stride * static_cast<std::size_t>(y)));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image read_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw IoError("cannot read PNG '" + path.string() + "': " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  Image out(static_cast<int>(img.width), static_cast<int>(img.height));
  if (!png_image_finish_read(&img, nullptr, out.data.data(), 0, nullptr)) {
    png_image_free(&img);
    throw IoError("cannot decode PNG '" + path.string() + "': " + img.message);
  }
  return out;
}

}  // namespace yoco
