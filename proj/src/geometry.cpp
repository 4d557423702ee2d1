#include "yoco/geometry.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace yoco {

std::string_view to_string(ExtractionStage stage) {
  switch (stage) {
    case ExtractionStage::kIngest:
      return "ingest";
    case ExtractionStage::kNormals:
      return "normals";
    case ExtractionStage::kClustering:
      return "clustering";
    case ExtractionStage::kPlaneFitting:
      return "plane_fitting";
    case ExtractionStage::kAngleFilter:
      return "angle_filter";
    case ExtractionStage::kDistanceSelection:
      return "distance_selection";
  }
  return "unknown";
}

std::string_view to_string(Frame frame) {
  switch (frame) {
    case Frame::kLiDAR:
      return "lidar";
    case Frame::kCamera:
      return "camera";
    case Frame::kWorld:
      return "world";
  }
  return "unknown";
}

Frame frame_from_string(std::string_view name) {
  if (name == "lidar") return Frame::kLiDAR;
  if (name == "camera") return Frame::kCamera;
  if (name == "world") return Frame::kWorld;
  throw InvalidArgument("unknown frame name '" + std::string(name) + "'");
}

bool is_finite(const Point3& p) {
  return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

UnitVector3::UnitVector3(const Vector3& v) {
  const double n = v.norm();
  if (!std::isfinite(n) || n < 1e-12) {
    throw DegenerateError("cannot normalize a zero-length or non-finite vector");
  }
  v_ = v / n;
}

double angle_between(const Vector3& a, const Vector3& b) {
  // atan2 form stays accurate for nearly (anti)parallel vectors.
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

Matrix3 skew(const Vector3& v) {
  Matrix3 s;
  // clang-format off
  s <<      0.0, -v.z(),  v.y(),
          v.z(),    0.0, -v.x(),
         -v.y(),  v.x(),    0.0;
  // clang-format on
  return s;
}

Matrix3 rotation_from_vector(const Vector3& omega) {
  const double theta = omega.norm();
  const Matrix3 k = skew(omega);
  if (theta < 1e-8) {
    // Second-order Taylor expansion; error O(theta^3).
    return project_to_rotation(Matrix3::Identity() + k + 0.5 * k * k);
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return project_to_rotation(Matrix3::Identity() + a * k + b * k * k);
}

Vector3 rotation_to_vector(const Matrix3& r) {
  const double cos_theta = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
  const Vector3 w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double sin_theta = 0.5 * w.norm();
  const double theta = std::atan2(sin_theta, cos_theta);

  if (theta < 1e-8) {
    return 0.5 * w;
  }
  if (std::numbers::pi - theta > 1e-4) {
    return theta / (2.0 * std::sin(theta)) * w;
  }

  // Near pi: recover the axis from the symmetric part,
  // sym(R) = cos(theta) I + (1 - cos(theta)) a a^T.
  const Matrix3 b = (0.5 * (r + r.transpose()) - cos_theta * Matrix3::Identity()) /
                    (1.0 - cos_theta);
  int col = 0;
  b.diagonal().maxCoeff(&col);
  Vector3 axis = b.col(col) / std::sqrt(std::max(b(col, col), 1e-300));
  axis.normalize();
  // Fix the sign using the antisymmetric part when it is informative.
  if (axis.dot(w) < 0.0) axis = -axis;
  return theta * axis;
}

Matrix3 axis_angle_to_matrix(const AxisAngle& a) {
  return rotation_from_vector(a.axis.vec() * a.angle);
}

AxisAngle matrix_to_axis_angle(const Matrix3& r) {
  const Vector3 omega = rotation_to_vector(r);
  const double angle = omega.norm();
  if (angle < 1e-15) {
    return AxisAngle{UnitVector3(0.0, 0.0, 1.0), 0.0};
  }
  return AxisAngle{UnitVector3(omega / angle), angle};
}

Matrix3 project_to_rotation(const Matrix3& m) {
  const Eigen::JacobiSVD<Matrix3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3 d = Matrix3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) {
    d(2, 2) = -1.0;
  }
  return svd.matrixU() * d * svd.matrixV().transpose();
}

double geodesic_distance(const Matrix3& a, const Matrix3& b) {
  return rotation_to_vector(a * b.transpose()).norm();
}

bool is_rotation(const Matrix3& r, double tol) {
  if (!r.allFinite()) return false;
  if (((r.transpose() * r) - Matrix3::Identity()).cwiseAbs().maxCoeff() > tol) {
    return false;
  }
  return std::abs(r.determinant() - 1.0) <= tol;
}

RigidTransform::RigidTransform()
    : rotation_(Matrix3::Identity()),
      translation_(Vector3::Zero()),
      source_(Frame::kLiDAR),
      target_(Frame::kLiDAR) {}

RigidTransform::RigidTransform(const Matrix3& rotation,
                               const Vector3& translation, Frame source,
                               Frame target)
    : rotation_(rotation),
      translation_(translation),
      source_(source),
      target_(target) {
  if (!is_rotation(rotation_)) {
    throw InvalidArgument("rotation is not orthonormal with determinant +1");
  }
  if (!translation_.allFinite()) {
    throw InvalidArgument("translation has non-finite components");
  }
}

RigidTransform RigidTransform::orthonormalized(const Matrix3& rotation,
                                               const Vector3& translation,
                                               Frame source, Frame target) {
  if (!rotation.allFinite()) {
    throw InvalidArgument("rotation has non-finite components");
  }
  return RigidTransform(project_to_rotation(rotation), translation, source,
                        target);
}

RigidTransform RigidTransform::identity(Frame frame) {
  return RigidTransform(Matrix3::Identity(), Vector3::Zero(), frame, frame);
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Point3 transform_point(const RigidTransform& t, const Point3& p) {
  return t * p;
}

PointCloud transform_cloud(const RigidTransform& t, const PointCloud& cloud) {
  if (cloud.frame != t.source()) {
    throw FrameMismatchError("cloud is in frame '" +
                             std::string(to_string(cloud.frame)) +
                             "' but transform expects '" +
                             std::string(to_string(t.source())) + "'");
  }
  PointCloud out;
  out.frame = t.target();
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(t * p);
  return out;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  if (b.target() != a.source()) {
    throw FrameMismatchError(
        "cannot compose " + std::string(to_string(a.source())) + "->" +
        std::string(to_string(a.target())) + " after " +
        std::string(to_string(b.source())) + "->" +
        std::string(to_string(b.target())));
  }
  return RigidTransform::orthonormalized(
      a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation(),
      b.source(), a.target());
}

RigidTransform invert(const RigidTransform& t) {
  const Matrix3 rt = t.rotation().transpose();
  return RigidTransform(rt, -(rt * t.translation()), t.target(), t.source());
}

}  // namespace yoco
