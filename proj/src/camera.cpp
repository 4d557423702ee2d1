#include "yoco/camera.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace yoco {

namespace {

// Hartley normalization: zero centroid, mean distance sqrt(2).
Eigen::Matrix3d normalizing_transform(std::span<const Eigen::Vector2d> pts) {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - mean).norm();
  mean_dist /= static_cast<double>(pts.size());
  if (mean_dist < 1e-12) {
    throw PoseEstimationError("all points coincide");
  }
  const double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t;
  // clang-format off
  t << s,   0.0, -s * mean.x(),
       0.0, s,   -s * mean.y(),
       0.0, 0.0, 1.0;
  // clang-format on
  return t;
}

// Ratio of the smallest to largest eigenvalue of the 2-D scatter.
double planar_spread_ratio(std::span<const Eigen::Vector2d> pts) {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
  for (const auto& p : pts) scatter += (p - mean) * (p - mean).transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(scatter);
  const double hi = es.eigenvalues()(1);
  return hi > 0.0 ? es.eigenvalues()(0) / hi : 0.0;
}

struct ReprojectionSystem {
  Eigen::Matrix<double, 6, 6> jtj = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> jtr = Eigen::Matrix<double, 6, 1>::Zero();
  double cost = 0.0;
};

double reprojection_cost(const CameraIntrinsics& k, const Matrix3& r,
                         const Vector3& t, std::span<const Point3> world,
                         std::span<const Pixel> pixels) {
  double cost = 0.0;
  for (std::size_t i = 0; i < world.size(); ++i) {
    const Point3 pc = r * world[i] + t;
    if (pc.z() <= 0.0) return std::numeric_limits<double>::infinity();
    const Pixel px(k.fx * pc.x() / pc.z() + k.cx, k.fy * pc.y() / pc.z() + k.cy);
    cost += (px - pixels[i]).squaredNorm();
  }
  return cost;
}

// Gauss-Newton system for a left perturbation R <- exp(d) R, t <- t + dt of
// the world -> camera pose.
ReprojectionSystem build_system(const CameraIntrinsics& k, const Matrix3& r,
                                const Vector3& t, std::span<const Point3> world,
                                std::span<const Pixel> pixels) {
  ReprojectionSystem sys;
  for (std::size_t i = 0; i < world.size(); ++i) {
    const Point3 rx = r * world[i];
    const Point3 pc = rx + t;
    const double iz = 1.0 / pc.z();
    const Pixel px(k.fx * pc.x() * iz + k.cx, k.fy * pc.y() * iz + k.cy);
    const Eigen::Vector2d res = px - pixels[i];

    Eigen::Matrix<double, 2, 3> dproj;
    // clang-format off
    dproj << k.fx * iz, 0.0,       -k.fx * pc.x() * iz * iz,
             0.0,       k.fy * iz, -k.fy * pc.y() * iz * iz;
    // clang-format on
    Eigen::Matrix<double, 2, 6> j;
    j.leftCols<3>() = -dproj * skew(rx);
    j.rightCols<3>() = dproj;

    sys.jtj += j.transpose() * j;
    sys.jtr += j.transpose() * res;
    sys.cost += res.squaredNorm();
  }
  return sys;
}

}  // namespace

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw InvalidArgument("focal lengths must be positive");
  }
  if (image_width <= 0 || image_height <= 0) {
    throw InvalidArgument("image size must be positive");
  }
  if (!(cx >= 0.0 && cx <= image_width && cy >= 0.0 && cy <= image_height)) {
    throw InvalidArgument("principal point lies outside the image");
  }
}

void BoardSpec::validate() const {
  if (rows < 2 || cols < 2) {
    throw InvalidArgument("board needs at least 2x2 interior corners");
  }
  if (!(square_size > 0.0)) {
    throw InvalidArgument("square size must be positive");
  }
}

std::vector<Point3> BoardSpec::world_corners() const {
  std::vector<Point3> out;
  out.reserve(static_cast<std::size_t>(corner_count()));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out.push_back(world_corner(r, c));
  }
  return out;
}

Pixel project_point(const CameraIntrinsics& k, const Point3& p) {
  if (!(p.z() > 0.0)) {
    throw BehindCameraError("point is behind the camera (z = " +
                            std::to_string(p.z()) + ")");
  }
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

void validate_corners(const CameraIntrinsics& k, const BoardSpec& spec,
                      std::span<const Pixel> corners) {
  spec.validate();
  if (corners.size() != static_cast<std::size_t>(spec.corner_count())) {
    throw InvalidArgument("expected " + std::to_string(spec.corner_count()) +
                          " corners, got " + std::to_string(corners.size()));
  }
  for (const auto& c : corners) {
    if (!c.allFinite() || !k.contains(c)) {
      throw InvalidArgument("corner observation outside the image");
    }
  }
}

Eigen::Matrix3d estimate_homography(std::span<const Eigen::Vector2d> plane,
                                    std::span<const Pixel> pixels) {
  if (plane.size() != pixels.size() || plane.size() < 4) {
    throw PoseEstimationError("homography needs at least 4 correspondences");
  }
  constexpr double kCollinear = 1e-10;
  if (planar_spread_ratio(plane) < kCollinear ||
      planar_spread_ratio(pixels) < kCollinear) {
    throw PoseEstimationError("correspondences are collinear");
  }

  const Eigen::Matrix3d tp = normalizing_transform(plane);
  const Eigen::Matrix3d tq = normalizing_transform(pixels);

  const auto n = static_cast<Eigen::Index>(plane.size());
  Eigen::MatrixXd a(2 * n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d p = tp * plane[i].homogeneous();
    const Eigen::Vector3d q = tq * pixels[i].homogeneous();
    // clang-format off
    a.row(2 * i)     << -p.x(), -p.y(), -1.0, 0.0, 0.0, 0.0,
                        q.x() * p.x(), q.x() * p.y(), q.x();
    a.row(2 * i + 1) << 0.0, 0.0, 0.0, -p.x(), -p.y(), -1.0,
                        q.y() * p.x(), q.y() * p.y(), q.y();
    // clang-format on
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0.0 || sv(7) / sv(0) < 1e-12) {
    throw PoseEstimationError("homography system is rank deficient");
  }
  const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

  Eigen::Matrix3d hmat = tq.inverse() * hn * tp;
  if (std::abs(hmat.determinant()) < 1e-14 * std::pow(hmat.norm(), 3)) {
    throw PoseEstimationError("homography is singular");
  }
  return hmat / hmat(2, 2);
}

BoardPose estimate_board_pose(const CameraIntrinsics& k, const BoardSpec& spec,
                              std::span<const Pixel> corners) {
  k.validate();
  validate_corners(k, spec, corners);

  const std::vector<Point3> world = spec.world_corners();
  std::vector<Eigen::Vector2d> plane;
  plane.reserve(world.size());
  for (const auto& w : world) plane.emplace_back(w.x(), w.y());

  const Eigen::Matrix3d h = estimate_homography(plane, corners);

  Eigen::Matrix3d kmat;
  // clang-format off
  kmat << k.fx, 0.0,  k.cx,
          0.0,  k.fy, k.cy,
          0.0,  0.0,  1.0;
  // clang-format on
  const Eigen::Matrix3d m = kmat.inverse() * h;
  const double n1 = m.col(0).norm();
  const double n2 = m.col(1).norm();
  if (n1 < 1e-15 || n2 < 1e-15) {
    throw PoseEstimationError("degenerate homography decomposition");
  }
  double lambda = 2.0 / (n1 + n2);
  if (m(2, 2) * lambda < 0.0) lambda = -lambda;  // board in front

  Matrix3 r0;
  r0.col(0) = lambda * m.col(0);
  r0.col(1) = lambda * m.col(1);
  r0.col(2) = r0.col(0).cross(r0.col(1));
  Matrix3 r = project_to_rotation(r0);
  Vector3 t = lambda * m.col(2);

  // Levenberg-Marquardt on the world -> camera pose.
  double cost = reprojection_cost(k, r, t, world, corners);
  double damping = 1e-3;
  for (int iter = 0; iter < 100; ++iter) {
    const ReprojectionSystem sys = build_system(k, r, t, world, corners);
    bool accepted = false;
    double step_norm = 0.0;
    for (int attempt = 0; attempt < 20 && !accepted; ++attempt) {
      Eigen::Matrix<double, 6, 6> a = sys.jtj;
      a.diagonal().array() += damping * (1.0 + sys.jtj.diagonal().array());
      const Eigen::Matrix<double, 6, 1> step = -a.ldlt().solve(sys.jtr);
      const Matrix3 r_new = rotation_from_vector(step.head<3>()) * r;
      const Vector3 t_new = t + step.tail<3>();
      const double new_cost = reprojection_cost(k, r_new, t_new, world, corners);
      if (new_cost <= cost) {
        r = r_new;
        t = t_new;
        step_norm = step.norm();
        cost = new_cost;
        damping = std::max(damping * 0.1, 1e-12);
        accepted = true;
      } else {
        damping *= 10.0;
      }
    }
    if (!accepted || step_norm < 1e-14) break;
  }

  double residual = 0.0;
  for (std::size_t i = 0; i < world.size(); ++i) {
    residual += (project_point(k, r * world[i] + t) - corners[i]).norm();
  }
  residual /= static_cast<double>(world.size());

  const RigidTransform world_to_camera(r, t, Frame::kWorld, Frame::kCamera);
  return BoardPose{invert(world_to_camera), residual};
}

double estimate_board_distance(const CameraIntrinsics& k, const BoardSpec& spec,
                               std::span<const Pixel> corners) {
  k.validate();
  validate_corners(k, spec, corners);

  std::vector<double> ranges;
  ranges.reserve(2 * static_cast<std::size_t>(spec.corner_count()));
  const auto at = [&](int r, int c) -> const Pixel& {
    return corners[static_cast<std::size_t>(r * spec.cols + c)];
  };
  const auto add_pair = [&](const Pixel& a, const Pixel& b) {
    const double w = (a - b).norm();
    if (w < 1.0) {
      throw DegenerateError("adjacent corners closer than 1 px");
    }
    ranges.push_back(k.focal() * spec.square_size / w);
  };
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      if (c + 1 < spec.cols) add_pair(at(r, c), at(r, c + 1));
      if (r + 1 < spec.rows) add_pair(at(r, c), at(r + 1, c));
    }
  }

  const std::size_t mid = ranges.size() / 2;
  std::nth_element(ranges.begin(), ranges.begin() + static_cast<long>(mid),
                   ranges.end());
  const double upper = ranges[mid];
  if (ranges.size() % 2 == 1) return upper;
  const double lower =
      *std::max_element(ranges.begin(), ranges.begin() + static_cast<long>(mid));
  return 0.5 * (lower + upper);
}

CornerObservations synthesize_corners(const CameraIntrinsics& k,
                                      const BoardSpec& spec,
                                      const RigidTransform& camera_to_world) {
  const RigidTransform world_to_camera = invert(camera_to_world);
  CornerObservations out;
  out.reserve(static_cast<std::size_t>(spec.corner_count()));
  for (const auto& w : spec.world_corners()) {
    out.push_back(project_point(k, world_to_camera * w));
  }
  return out;
}

}  // namespace yoco
