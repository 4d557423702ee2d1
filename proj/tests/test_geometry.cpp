#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "yoco/errors.hpp"
#include "yoco/geometry.hpp"

namespace yoco {
namespace {

using testing::kDeg;
using testing::random_rotation;
using testing::random_transform;
using testing::random_vector;
using testing::rot;

TEST(UnitVector3, NormalizesInput) {
  const UnitVector3 u(Vector3(3.0, 0.0, 4.0));
  EXPECT_NEAR(u.vec().norm(), 1.0, 1e-15);
  EXPECT_NEAR(u.x(), 0.6, 1e-15);
  EXPECT_NEAR(u.z(), 0.8, 1e-15);
}

TEST(UnitVector3, RejectsZeroAndNonFinite) {
  EXPECT_THROW(UnitVector3(0.0, 0.0, 0.0), DegenerateError);
  EXPECT_THROW(UnitVector3(std::nan(""), 0.0, 1.0), DegenerateError);
}

TEST(TransformPoint, Identity) {
  const auto t = RigidTransform::identity(Frame::kLiDAR);
  EXPECT_TRUE(transform_point(t, Point3(1, 2, 3)).isApprox(Point3(1, 2, 3)));
}

TEST(TransformPoint, PureTranslation) {
  const RigidTransform t(Matrix3::Identity(), Vector3(0.1, 0, 0), Frame::kLiDAR, Frame::kCamera);
  EXPECT_NEAR((transform_point(t, Point3::Zero()) - Point3(0.1, 0, 0)).norm(), 0.0, 1e-15);
}

TEST(TransformPoint, QuarterTurnAboutZ) {
  const RigidTransform t(rot(Vector3::UnitZ(), 90 * kDeg), Vector3::Zero(), Frame::kLiDAR,
                         Frame::kCamera);
  EXPECT_NEAR((transform_point(t, Point3(1, 0, 0)) - Point3(0, 1, 0)).norm(), 0.0, 1e-15);
}

TEST(TransformCloud, TagsOutputWithTarget) {
  const RigidTransform t(Matrix3::Identity(), Vector3(1, 0, 0), Frame::kLiDAR, Frame::kCamera);
  PointCloud c{{Point3(0, 0, 0)}, Frame::kLiDAR};
  const PointCloud out = transform_cloud(t, c);
  EXPECT_EQ(out.frame, Frame::kCamera);
  EXPECT_DOUBLE_EQ(out.points[0].x(), 1.0);
  c.frame = Frame::kWorld;
  EXPECT_THROW(transform_cloud(t, c), FrameMismatchError);
}

TEST(RigidTransform, RejectsNonRotation) {
  Matrix3 m = Matrix3::Identity();
  m(0, 0) = 1.001;
  EXPECT_THROW(RigidTransform(m, Vector3::Zero(), Frame::kLiDAR, Frame::kCamera),
               InvalidArgument);
  Matrix3 reflect = Matrix3::Identity();
  reflect(2, 2) = -1.0;
  EXPECT_THROW(RigidTransform(reflect, Vector3::Zero(), Frame::kLiDAR, Frame::kCamera),
               InvalidArgument);
}

TEST(RigidTransform, OrthonormalizedRepairsDrift) {
  std::mt19937_64 rng(3);
  Matrix3 r = random_rotation(rng);
  r(0, 1) += 1e-7;
  const auto t = RigidTransform::orthonormalized(r, Vector3::Zero(), Frame::kLiDAR, Frame::kCamera);
  EXPECT_TRUE(is_rotation(t.rotation(), 1e-12));
}

TEST(Compose, IdentityIsNeutral) {
  std::mt19937_64 rng(1);
  const auto t = random_transform(rng, Frame::kLiDAR, Frame::kCamera);
  const auto c = compose(t, RigidTransform::identity(Frame::kLiDAR));
  EXPECT_LT((c.rotation() - t.rotation()).norm(), 1e-12);
  EXPECT_LT((c.translation() - t.translation()).norm(), 1e-12);
}

TEST(Compose, InverseGivesIdentity) {
  std::mt19937_64 rng(2);
  const auto t = random_transform(rng, Frame::kLiDAR, Frame::kCamera);
  const auto c = compose(t, invert(t));
  EXPECT_EQ(c.source(), Frame::kCamera);
  EXPECT_EQ(c.target(), Frame::kCamera);
  EXPECT_LT((c.rotation() - Matrix3::Identity()).norm(), 1e-12);
  EXPECT_LT(c.translation().norm(), 1e-12);
}

TEST(Compose, TwoEighthTurnsMakeAQuarter) {
  const RigidTransform a(rot(Vector3::UnitZ(), 45 * kDeg), Vector3::Zero(), Frame::kLiDAR,
                         Frame::kLiDAR);
  const auto c = compose(a, a);
  EXPECT_LT((c * Point3(1, 0, 0) - Point3(0, 1, 0)).norm(), 1e-12);
}

TEST(Compose, FrameMismatchThrows) {
  const RigidTransform a(Matrix3::Identity(), Vector3::Zero(), Frame::kCamera, Frame::kWorld);
  const RigidTransform b(Matrix3::Identity(), Vector3::Zero(), Frame::kWorld, Frame::kCamera);
  EXPECT_NO_THROW(compose(b, a));
  EXPECT_THROW(compose(a, a), FrameMismatchError);
}

TEST(Invert, PureTranslationNegates) {
  const RigidTransform t(Matrix3::Identity(), Vector3(0, 0, 1), Frame::kLiDAR, Frame::kCamera);
  const auto i = invert(t);
  EXPECT_EQ(i.source(), Frame::kCamera);
  EXPECT_EQ(i.target(), Frame::kLiDAR);
  EXPECT_LT((i.translation() - Vector3(0, 0, -1)).norm(), 1e-15);
  const auto id = invert(RigidTransform::identity(Frame::kWorld));
  EXPECT_LT((id.rotation() - Matrix3::Identity()).norm(), 1e-15);
}

TEST(GeometryProperty, InverseComposesToIdentity) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto t = random_transform(rng, Frame::kLiDAR, Frame::kCamera);
    const auto c = compose(invert(t), t);
    EXPECT_LT((c.rotation() - Matrix3::Identity()).norm(), 1e-12);
    EXPECT_LT(c.translation().norm(), 1e-12);
  }
}

TEST(GeometryProperty, TransformsAreIsometries) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    const auto t = random_transform(rng, Frame::kLiDAR, Frame::kCamera);
    const Point3 p = random_vector(rng, 10.0);
    const Point3 q = random_vector(rng, 10.0);
    EXPECT_NEAR((t * p - t * q).norm(), (p - q).norm(), 1e-9);
  }
}

TEST(GeometryProperty, ComposeIsAssociative) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 200; ++i) {
    const auto a = random_transform(rng, Frame::kCamera, Frame::kWorld);
    const auto b = random_transform(rng, Frame::kLiDAR, Frame::kCamera);
    const auto c = random_transform(rng, Frame::kLiDAR, Frame::kLiDAR);
    const auto l = compose(compose(a, b), c);
    const auto r = compose(a, compose(b, c));
    EXPECT_LT((l.rotation() - r.rotation()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((l.translation() - r.translation()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(GeometryProperty, ComposeMatchesSequentialApplication) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 200; ++i) {
    const auto a = random_transform(rng, Frame::kCamera, Frame::kWorld);
    const auto b = random_transform(rng, Frame::kLiDAR, Frame::kCamera);
    const Point3 p = random_vector(rng, 5.0);
    EXPECT_LT((compose(a, b) * p - a * (b * p)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(AxisAngle, ZeroAngleIsIdentity) {
  for (const Vector3& axis : {Vector3(1, 0, 0), Vector3(0.3, -2, 1)}) {
    const Matrix3 r = axis_angle_to_matrix(AxisAngle{UnitVector3(axis), 0.0});
    EXPECT_LT((r - Matrix3::Identity()).norm(), 1e-15);
  }
}

TEST(AxisAngle, QuarterTurnAboutZ) {
  const Matrix3 r = axis_angle_to_matrix(AxisAngle{UnitVector3(0, 0, 1), std::numbers::pi / 2});
  EXPECT_LT((r * Vector3(1, 0, 0) - Vector3(0, 1, 0)).norm(), 1e-15);
}

TEST(AxisAngle, MatchesEigenReference) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ang(0.0, std::numbers::pi);
  for (int i = 0; i < 200; ++i) {
    const Vector3 axis = random_vector(rng).normalized();
    const double a = ang(rng);
    EXPECT_LT((axis_angle_to_matrix(AxisAngle{UnitVector3(axis), a}) - rot(axis, a)).norm(),
              1e-12);
  }
}

TEST(AxisAngleProperty, RoundTrip) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> ang(0.0, std::numbers::pi);
  for (int i = 0; i < 500; ++i) {
    const AxisAngle a{UnitVector3(random_vector(rng)), ang(rng)};
    const Matrix3 r = axis_angle_to_matrix(a);
    EXPECT_TRUE(is_rotation(r));
    const AxisAngle b = matrix_to_axis_angle(r);
    EXPECT_GE(b.angle, 0.0);
    EXPECT_LE(b.angle, std::numbers::pi);
    EXPECT_LT(geodesic_distance(axis_angle_to_matrix(b), r), 1e-9);
    EXPECT_NEAR(b.angle, a.angle, 1e-9);
    if (a.angle > 1e-6 && a.angle < std::numbers::pi - 1e-6) {
      EXPECT_LT((b.axis.vec() - a.axis.vec()).norm(), 1e-7);
    }
  }
}

TEST(AxisAngleProperty, NearPiAcceptsAntipodalAxis) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    const Vector3 axis = random_vector(rng).normalized();
    for (const double a : {std::numbers::pi, std::numbers::pi - 1e-9, std::numbers::pi - 1e-5}) {
      const Matrix3 r = rot(axis, a);
      const AxisAngle b = matrix_to_axis_angle(r);
      EXPECT_NEAR(std::abs(b.axis.vec().dot(axis)), 1.0, 1e-7);
      EXPECT_LT(geodesic_distance(axis_angle_to_matrix(b), r), 1e-9);
    }
  }
}

TEST(RotationVector, SmallAnglesStayAccurate) {
  for (const double a : {1e-14, 1e-10, 1e-6, 1e-3}) {
    const Vector3 w = a * Vector3(1, 2, 2).normalized();
    EXPECT_LT((rotation_to_vector(rotation_from_vector(w)) - w).norm(), 1e-15 + 1e-12 * a);
  }
}

TEST(ProjectToRotation, ReturnsProperRotation) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) {
    Matrix3 m = random_rotation(rng) + 0.05 * Matrix3::Random();
    EXPECT_TRUE(is_rotation(project_to_rotation(m), 1e-12));
  }
}

TEST(Geodesic, MatchesKnownAngle) {
  std::mt19937_64 rng(41);
  const Matrix3 a = random_rotation(rng);
  EXPECT_NEAR(geodesic_distance(a * rot(Vector3(1, 1, 0), 1 * kDeg), a), 1 * kDeg, 1e-12);
  EXPECT_NEAR(angle_between(Vector3(1, 0, 0), Vector3(0, 0, 2)), std::numbers::pi / 2, 1e-15);
}

TEST(Frame, StringRoundTrip) {
  for (const Frame f : {Frame::kLiDAR, Frame::kCamera, Frame::kWorld}) {
    EXPECT_EQ(frame_from_string(to_string(f)), f);
  }
  EXPECT_THROW(frame_from_string("imu"), InvalidArgument);
}

}  // namespace
}  // namespace yoco
