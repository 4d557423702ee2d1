#pragma once

// Rigid-body math and frame bookkeeping.
//
// Conventions: a RigidTransform labelled source -> target maps a point
// expressed in `source` into `target`, p_target = R * p_source + t.
// compose(A, B) is "A after B" and requires B.target == A.source.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstddef>
#include <string_view>
#include <vector>

#include "yoco/errors.hpp"

namespace yoco {

using Point3 = Eigen::Vector3d;
using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

enum class Frame { kLiDAR, kCamera, kWorld };

std::string_view to_string(Frame frame);
Frame frame_from_string(std::string_view name);

bool is_finite(const Point3& p);

/// A direction with Euclidean norm 1 (within 1e-9).
class UnitVector3 {
 public:
  UnitVector3() : v_(0.0, 0.0, 1.0) {}

  /// Normalizes `v`. Throws DegenerateError for zero-length or non-finite
  /// input.
  explicit UnitVector3(const Vector3& v);
  UnitVector3(double x, double y, double z) : UnitVector3(Vector3(x, y, z)) {}

  const Vector3& vec() const noexcept { return v_; }
  double x() const noexcept { return v_.x(); }
  double y() const noexcept { return v_.y(); }
  double z() const noexcept { return v_.z(); }

  double dot(const UnitVector3& other) const noexcept {
    return v_.dot(other.v_);
  }
  UnitVector3 operator-() const noexcept {
    UnitVector3 out;
    out.v_ = -v_;
    return out;
  }

 private:
  Vector3 v_;
};

/// Angle between two directions in radians, in [0, pi].
double angle_between(const Vector3& a, const Vector3& b);

struct AxisAngle {
  UnitVector3 axis;
  double angle = 0.0;  // radians, [0, pi]
};

Matrix3 skew(const Vector3& v);

/// Rodrigues formula. The result is re-projected onto SO(3).
Matrix3 axis_angle_to_matrix(const AxisAngle& a);

/// Inverse of axis_angle_to_matrix. For a zero rotation the axis is +z.
/// At angle pi the axis sign is ambiguous; either representative may be
/// returned.
AxisAngle matrix_to_axis_angle(const Matrix3& r);

/// exp map from a rotation vector (axis * angle).
Matrix3 rotation_from_vector(const Vector3& omega);
/// log map to a rotation vector with norm in [0, pi].
Vector3 rotation_to_vector(const Matrix3& r);

/// Closest rotation in the Frobenius sense (polar decomposition via SVD),
/// with determinant forced to +1.
Matrix3 project_to_rotation(const Matrix3& m);

/// Geodesic distance on SO(3) in radians.
double geodesic_distance(const Matrix3& a, const Matrix3& b);

bool is_rotation(const Matrix3& r, double tol = 1e-9);

class RigidTransform {
 public:
  /// Identity on the LiDAR frame.
  RigidTransform();

  /// Validates the rotation (orthonormal, det +1 within 1e-9) and that all
  /// entries are finite. Throws InvalidArgument otherwise.
  RigidTransform(const Matrix3& rotation, const Vector3& translation,
                 Frame source, Frame target);

  /// Same as the constructor but projects `rotation` onto SO(3) first.
  static RigidTransform orthonormalized(const Matrix3& rotation,
                                        const Vector3& translation,
                                        Frame source, Frame target);

  static RigidTransform identity(Frame frame);

  const Matrix3& rotation() const noexcept { return rotation_; }
  const Vector3& translation() const noexcept { return translation_; }
  Frame source() const noexcept { return source_; }
  Frame target() const noexcept { return target_; }

  Point3 operator*(const Point3& p) const { return rotation_ * p + translation_; }

  Eigen::Matrix4d matrix() const;

 private:
  Matrix3 rotation_;
  Vector3 translation_;
  Frame source_;
  Frame target_;
};

struct PointCloud {
  std::vector<Point3> points;
  Frame frame = Frame::kLiDAR;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

Point3 transform_point(const RigidTransform& t, const Point3& p);

/// Maps every point; the cloud's frame must equal t.source().
PointCloud transform_cloud(const RigidTransform& t, const PointCloud& cloud);

/// a after b. Throws FrameMismatchError unless b.target() == a.source().
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

RigidTransform invert(const RigidTransform& t);

}  // namespace yoco
