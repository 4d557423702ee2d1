#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "test_util.hpp"
#include "yoco/errors.hpp"
#include "yoco/optimizer.hpp"
#include "yoco/synth.hpp"

namespace yoco {
namespace {

using testing::kDeg;

synth::SceneSpec identity_board_scene(double resolution_deg) {
  auto s = synth::board_only_preset();
  s.ground_truth = RigidTransform(Matrix3::Identity(), Vector3::Zero(), Frame::kLiDAR, Frame::kCamera);
  s.lidar.azimuth_resolution_deg = resolution_deg;
  s.lidar.elevation_resolution_deg = resolution_deg;
  return s;
}

TEST(Intersect, Primitives) {
  const synth::Primitive rect{"r", synth::PrimitiveKind::kRectangle, Point3(0, 0, 2),
                              Matrix3::Identity(), Vector3(0.5, 0.5, 0)};
  EXPECT_NEAR(synth::intersect(rect, Vector3(0, 0, 1)), 2.0, 1e-15);
  EXPECT_LT(synth::intersect(rect, Vector3(1, 0, 1).normalized()), 0.0);
  EXPECT_LT(synth::intersect(rect, Vector3(0, 0, -1)), 0.0);

  const synth::Primitive sphere{"s", synth::PrimitiveKind::kSphere, Point3(0, 0, 5),
                                Matrix3::Identity(), Vector3(1, 0, 0)};
  EXPECT_NEAR(synth::intersect(sphere, Vector3(0, 0, 1)), 4.0, 1e-12);
  EXPECT_LT(synth::intersect(sphere, Vector3(1, 0, 0)), 0.0);

  const synth::Primitive box{"b", synth::PrimitiveKind::kBox, Point3(0, 0, 3),
                             Matrix3::Identity(), Vector3(0.5, 0.5, 0.5)};
  EXPECT_NEAR(synth::intersect(box, Vector3(0, 0, 1)), 2.5, 1e-12);

  const synth::Primitive disk{"d", synth::PrimitiveKind::kDisk, Point3(0, 0, 2),
                              Matrix3::Identity(), Vector3(0.3, 0, 0)};
  EXPECT_NEAR(synth::intersect(disk, Vector3(0.1, 0, 1).normalized()), std::hypot(0.2, 2.0), 1e-12);
  EXPECT_LT(synth::intersect(disk, Vector3(0.2, 0, 1).normalized()), 0.0);
}

TEST(GenerateFrame, NoiseFreeBoardLiesOnPlane) {
  const auto s = identity_board_scene(0.2);
  const auto f = synth::generate_frame(s, 0);
  ASSERT_FALSE(f.cloud.empty());
  EXPECT_EQ(f.labels.size(), f.cloud.size());
  for (const auto& p : f.cloud.points) EXPECT_NEAR(p.z(), 2.0, 1e-12);
}

TEST(GenerateFrame, RowCountsMatchClosedForm) {
  const auto s = identity_board_scene(0.2);
  const auto f = synth::generate_frame(s, 0);
  // Closed-form hit of ray (a, e) on z = 2: x = 2 tan a, y = -2 tan e / cos a.
  const Point3 c = s.board.center();
  const double x0 = -s.board.square_size - c.x();
  const double x1 = s.board.cols * s.board.square_size - c.x();
  const double y0 = -s.board.square_size - c.y();
  const double y1 = s.board.rows * s.board.square_size - c.y();
  const int na = static_cast<int>(std::floor(s.lidar.azimuth_fov_deg / 0.2 + 1e-9)) + 1;
  const int ne = static_cast<int>(std::floor(s.lidar.elevation_fov_deg / 0.2 + 1e-9)) + 1;
  std::map<long, int> expected;
  for (int ei = 0; ei < ne; ++ei) {
    const double e = (0.5 * s.lidar.elevation_fov_deg - 0.2 * ei) * kDeg;
    for (int ai = 0; ai < na; ++ai) {
      const double a = (-0.5 * s.lidar.azimuth_fov_deg + 0.2 * ai) * kDeg;
      const double x = 2.0 * std::tan(a);
      const double y = -2.0 * std::tan(e) / std::cos(a);
      if (x >= x0 && x <= x1 && y >= y0 && y <= y1) ++expected[ei];
    }
  }
  std::map<long, int> got;
  for (const auto& p : f.cloud.points) {
    const double e = std::asin(-p.y() / p.norm()) / kDeg;
    ++got[std::lround((0.5 * s.lidar.elevation_fov_deg - e) / 0.2)];
  }
  EXPECT_LE(std::abs(static_cast<long>(got.size()) - static_cast<long>(expected.size())), 2);
  for (const auto& [row, n] : expected) EXPECT_LE(std::abs(got[row] - n), 1) << "row " << row;
}

TEST(GenerateFrame, CornersRecoverPose) {
  const auto s = synth::board_only_preset();
  const auto f = synth::generate_frame(s, 0);
  const BoardPose pose = estimate_board_pose(s.camera.intrinsics, s.board, f.corners);
  EXPECT_LT(geodesic_distance(pose.transform.rotation(), f.true_board_pose.rotation()), 1e-6);
  EXPECT_LT((pose.transform.translation() - f.true_board_pose.translation()).norm(), 1e-6);
}

TEST(GenerateFrame, SeedsAreBitReproducible) {
  auto s = synth::room_preset();
  s.lidar.range_noise = 0.005;
  s.camera.pixel_noise = 0.2;
  s.seed = 1234;
  const auto a = synth::generate_frame(s, 0);
  const auto b = synth::generate_frame(s, 0);
  EXPECT_EQ(a.cloud.points, b.cloud.points);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.corners, b.corners);
  s.seed = 1235;
  EXPECT_NE(synth::generate_frame(s, 0).cloud.points, a.cloud.points);
}

TEST(GenerateFrame, BoardPointsSatisfyPlaneWithinNoise) {
  auto s = synth::room_preset();
  for (const double sigma : {0.0, 0.005}) {
    s.lidar.range_noise = sigma;
    const auto f = synth::generate_frame(s, 0);
    const RigidTransform lidar_to_world = compose(f.true_board_pose, s.ground_truth);
    std::size_t within = 0;
    std::size_t n = 0;
    for (const auto& p : f.board_points().points) {
      const double z = std::abs((lidar_to_world * p).z());
      ++n;
      if (sigma == 0.0) {
        EXPECT_LE(z, 1e-9);
      } else {
        EXPECT_LE(z, 6 * sigma);
      }
      within += z <= 3 * sigma + 1e-9;
    }
    // Untruncated Gaussian noise exceeds 3 sigma about 0.3% of the time.
    EXPECT_GE(static_cast<double>(within), 0.99 * static_cast<double>(n));
  }
}

TEST(GenerateFrame, LabelsCoverClutter) {
  const auto s = synth::room_preset();
  const auto f = synth::generate_frame(s, 0);
  std::vector<int> counts(s.clutter.size() + 1, 0);
  for (const int l : f.labels) {
    ASSERT_GE(l, 0);
    ASSERT_LE(l, static_cast<int>(s.clutter.size()));
    ++counts[static_cast<std::size_t>(l)];
  }
  for (std::size_t i = 0; i < counts.size(); ++i) EXPECT_GT(counts[i], 0) << "label " << i;
}

TEST(GenerateFrame, SensorFixedGrid) {
  // Rotating the camera frame (extrinsic and board poses together) moves no
  // LiDAR sample; board geometry seen from the camera rotates with it.
  auto s = synth::room_preset();
  const auto a = synth::generate_frame(s, 0);
  const RigidTransform q(testing::rot(Vector3(0, 1, 0), 3 * kDeg), Vector3::Zero(), Frame::kCamera,
                         Frame::kCamera);
  auto moved = s;
  moved.ground_truth = compose(q, s.ground_truth);
  for (auto& p : moved.board_poses) p = compose(q, p);
  const auto b = synth::generate_frame(moved, 0);
  ASSERT_EQ(a.cloud.size(), b.cloud.size());
  EXPECT_EQ(a.labels, b.labels);
  for (std::size_t i = 0; i < a.cloud.size(); ++i) {
    EXPECT_LT((a.cloud.points[i] - b.cloud.points[i]).norm(), 1e-9);
    EXPECT_LT((moved.ground_truth * b.cloud.points[i] - q * (s.ground_truth * a.cloud.points[i])).norm(),
              1e-9);
  }
}

TEST(GenerateFrame, Errors) {
  auto s = synth::board_only_preset();
  EXPECT_THROW(synth::generate_frame(s, 1), InvalidArgument);
  s.board_poses[0] = RigidTransform(Matrix3::Identity(), Vector3(0, 0, -2), Frame::kWorld,
                                    Frame::kCamera);
  EXPECT_THROW(synth::generate_frame(s, 0), BoardNotVisibleError);
  s = synth::board_only_preset();
  s.board_poses[0] = RigidTransform(Matrix3::Identity(), Vector3(1.5, 0, 2), Frame::kWorld,
                                    Frame::kCamera);
  EXPECT_THROW(synth::generate_frame(s, 0), BoardNotVisibleError);
  s = synth::board_only_preset();
  s.lidar.azimuth_resolution_deg = 0.0;
  EXPECT_THROW(synth::generate_frame(s, 0), InvalidArgument);
  s = synth::board_only_preset();
  s.lidar.range_noise = -1.0;
  EXPECT_THROW(synth::generate_frame(s, 0), InvalidArgument);
}

double min_pairwise_angle_deg(const std::vector<synth::LabeledFrame>& frames) {
  double best = 180.0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    for (std::size_t j = i + 1; j < frames.size(); ++j) {
      const Vector3 a = frames[i].true_board_pose.rotation().row(2);
      const Vector3 b = frames[j].true_board_pose.rotation().row(2);
      best = std::min(best, angle_between(a, b) / kDeg);
    }
  }
  return best;
}

TEST(GenerateSuite, ThreeFramesSpreadThirty) {
  auto s = synth::board_only_preset();
  const auto frames = synth::generate_suite(s, 3, 30.0);
  ASSERT_EQ(frames.size(), 3u);
  EXPECT_GE(min_pairwise_angle_deg(frames), 30.0);
  std::vector<CalibrationFrame> cf;
  for (const auto& f : frames) cf.push_back(synth::labeled_calibration_frame(f, {f.true_board_pose, 0}));
  EXPECT_EQ(observability_check(cf).rank_estimate, 3);
}

TEST(GenerateSuite, SingleFrame) {
  auto s = synth::board_only_preset();
  EXPECT_EQ(synth::generate_suite(s, 1, 80.0).size(), 1u);
}

TEST(GenerateSuite, TenFramesFifteenDegrees) {
  auto s = synth::board_only_preset();
  const auto frames = synth::generate_suite(s, 10, 15.0);
  ASSERT_EQ(frames.size(), 10u);
  EXPECT_GE(min_pairwise_angle_deg(frames), 15.0);
}

TEST(GenerateSuite, Deterministic) {
  auto a = synth::room_preset();
  auto b = synth::room_preset();
  a.seed = b.seed = 7;
  const auto fa = synth::generate_suite(a, 3, 20.0);
  const auto fb = synth::generate_suite(b, 3, 20.0);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(fa[i].cloud.points, fb[i].cloud.points);
    EXPECT_EQ(fa[i].corners, fb[i].corners);
  }
}

TEST(GenerateSuite, InfeasibleSpread) {
  auto s = synth::board_only_preset();
  EXPECT_THROW(synth::generate_suite(s, 3, 60.0), InfeasibleSpreadError);
  EXPECT_THROW(synth::generate_suite(s, 40, 20.0), InfeasibleSpreadError);
  EXPECT_THROW(synth::generate_suite(s, 0, 20.0), InvalidArgument);
}

TEST(PrimitiveKind, StringRoundTrip) {
  for (const auto k : {synth::PrimitiveKind::kRectangle, synth::PrimitiveKind::kBox,
                       synth::PrimitiveKind::kSphere, synth::PrimitiveKind::kDisk}) {
    EXPECT_EQ(synth::primitive_kind_from_string(synth::to_string(k)), k);
  }
  EXPECT_THROW(synth::primitive_kind_from_string("cone"), InvalidArgument);
}

TEST(CircleTarget, CentroidNearTrueCenter) {
  const auto s = synth::board_only_preset();
  const auto obs = synth::generate_circle_target(s, Point3(0.2, -0.1, 3.0), 0.3, 1);
  ASSERT_GT(obs.points.size(), 50u);
  Vector3 sum = Vector3::Zero();
  for (const auto& p : obs.points.points) {
    EXPECT_LE((p - obs.true_center_lidar).norm(), 0.3 + 1e-9);
    sum += p;
  }
  EXPECT_LT((sum / static_cast<double>(obs.points.size()) - obs.true_center_lidar).norm(), 0.01);
}

}  // namespace
}  // namespace yoco
