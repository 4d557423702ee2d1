#include "yoco/optimizer.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace yoco {

namespace {

constexpr double kRankThreshold = 1e-6;
constexpr double kDistinctAngleDeg = 5.0;
constexpr double kMaxDamping = 1e16;

// Board normal expressed in the camera frame: z_W = n . p_C + t_WC.z with
// n the third row of R_WC.
Vector3 camera_board_normal(const BoardPose& pose) {
  return pose.transform.rotation().row(2).transpose();
}

struct NormalEquations {
  Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
  Vector6 g = Vector6::Zero();
};

NormalEquations build_normal_equations(const RigidTransform& x,
                                       std::span<const CalibrationFrame> frames,
                                       double huber_delta) {
  NormalEquations ne;
  const Matrix3& r = x.rotation();
  const Vector3& t = x.translation();
  for (const auto& f : frames) {
    const Vector3 n = camera_board_normal(f.board_pose);
    const double c = f.board_pose.transform.translation().z();
    for (const auto& p : f.board_points.points) {
      const Vector3 rp = r * p;
      const double res = n.dot(rp + t) + c;
      Vector6 j;
      j.head<3>() = rp.cross(n);
      j.tail<3>() = n;
      const double a = std::abs(res);
      const double w = a <= huber_delta ? 1.0 : huber_delta / a;
      ne.h.noalias() += w * j * j.transpose();
      ne.g.noalias() += w * res * j;
    }
  }
  return ne;
}

double cost_at(const RigidTransform& x, std::span<const CalibrationFrame> frames,
               double huber_delta) {
  return robust_cost(coplanar_residuals(x, frames), huber_delta);
}

}  // namespace

void SolverOptions::validate() const {
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be positive");
  if (!(parameter_tolerance > 0.0) || !(residual_tolerance > 0.0)) {
    throw InvalidArgument("solver tolerances must be positive");
  }
  if (!(damping_init > 0.0)) throw InvalidArgument("damping_init must be positive");
  if (!(huber_delta > 0.0)) throw InvalidArgument("huber_delta must be positive");
  if (initial_guess && (initial_guess->source() != Frame::kLiDAR ||
                        initial_guess->target() != Frame::kCamera)) {
    throw FrameMismatchError("initial guess must map lidar -> camera");
  }
}

void validate_frames(std::span<const CalibrationFrame> frames) {
  if (frames.empty()) throw InvalidArgument("no calibration frames");
  for (const auto& f : frames) {
    if (f.board_points.empty()) {
      throw InvalidArgument("calibration frame without board points");
    }
    if (f.board_points.frame != Frame::kLiDAR) {
      throw FrameMismatchError("board points must be in the lidar frame");
    }
    if (f.board_pose.transform.source() != Frame::kCamera ||
        f.board_pose.transform.target() != Frame::kWorld) {
      throw FrameMismatchError("board pose must map camera -> world");
    }
  }
}

Eigen::VectorXd coplanar_residuals(const RigidTransform& x,
                                   std::span<const CalibrationFrame> frames) {
  validate_frames(frames);
  std::size_t total = 0;
  for (const auto& f : frames) total += f.board_points.size();
  Eigen::VectorXd out(static_cast<Eigen::Index>(total));
  Eigen::Index k = 0;
  for (const auto& f : frames) {
    const RigidTransform lidar_to_world = compose(f.board_pose.transform, x);
    const Vector3 row = lidar_to_world.rotation().row(2).transpose();
    const double tz = lidar_to_world.translation().z();
    for (const auto& p : f.board_points.points) out(k++) = row.dot(p) + tz;
  }
  return out;
}

Eigen::MatrixXd coplanar_jacobian(const RigidTransform& x,
                                  std::span<const CalibrationFrame> frames) {
  validate_frames(frames);
  std::size_t total = 0;
  for (const auto& f : frames) total += f.board_points.size();
  Eigen::MatrixXd j(static_cast<Eigen::Index>(total), 6);
  Eigen::Index k = 0;
  for (const auto& f : frames) {
    const Vector3 n = camera_board_normal(f.board_pose);
    for (const auto& p : f.board_points.points) {
      const Vector3 rp = x.rotation() * p;
      j.row(k).head<3>() = rp.cross(n).transpose();
      j.row(k).tail<3>() = n.transpose();
      ++k;
    }
  }
  return j;
}

RigidTransform apply_increment(const RigidTransform& x, const Vector6& delta) {
  return RigidTransform::orthonormalized(
      rotation_from_vector(delta.head<3>()) * x.rotation(),
      x.translation() + delta.tail<3>(), x.source(), x.target());
}

double robust_cost(const Eigen::VectorXd& residuals, double huber_delta) {
  double cost = 0.0;
  for (Eigen::Index i = 0; i < residuals.size(); ++i) {
    const double a = std::abs(residuals(i));
    cost += a <= huber_delta ? 0.5 * a * a : huber_delta * (a - 0.5 * huber_delta);
  }
  return cost;
}

ObservabilityReport observability_check(std::span<const CalibrationFrame> frames) {
  if (frames.empty()) throw InvalidArgument("no calibration frames");
  ObservabilityReport report;

  std::vector<Vector3> normals;
  normals.reserve(frames.size());
  Matrix3 gram = Matrix3::Zero();
  for (const auto& f : frames) {
    const Vector3 n = camera_board_normal(f.board_pose).normalized();
    normals.push_back(n);
    gram += n * n.transpose();
  }

  const Eigen::SelfAdjointEigenSolver<Matrix3> es(gram);
  // Eigen returns ascending order.
  for (int i = 0; i < 3; ++i) {
    report.normal_gram_eigenvalues[static_cast<std::size_t>(i)] =
        std::max(es.eigenvalues()(2 - i), 0.0);
  }
  const double top = report.normal_gram_eigenvalues[0];
  for (const double ev : report.normal_gram_eigenvalues) {
    if (top > 0.0 && ev > kRankThreshold * top) ++report.rank_estimate;
  }

  // Greedy count of orientations at least 5 deg apart (sign-agnostic).
  const double cos_min = std::cos(kDistinctAngleDeg * std::numbers::pi / 180.0);
  std::vector<Vector3> distinct;
  for (const auto& n : normals) {
    const bool is_new = std::none_of(distinct.begin(), distinct.end(),
                                     [&](const Vector3& d) {
                                       return std::abs(d.dot(n)) > cos_min;
                                     });
    if (is_new) distinct.push_back(n);
  }
  report.distinct_orientation_count = static_cast<int>(distinct.size());

  if (report.distinct_orientation_count < 3) {
    std::ostringstream msg;
    const int free_dirs = 3 - report.rank_estimate;
    msg << "only " << report.distinct_orientation_count
        << " distinct board orientation(s); board normals span rank "
        << report.rank_estimate << ", leaving " << free_dirs
        << " unconstrained translation direction(s)";
    if (report.rank_estimate < 2) {
      msg << " and the rotation about the board normal unconstrained";
    }
    report.warning = msg.str();
  }
  return report;
}

ExtrinsicEstimate solve_extrinsics(std::span<const CalibrationFrame> frames,
                                   const SolverOptions& opts) {
  opts.validate();
  validate_frames(frames);
  std::size_t total = 0;
  for (const auto& f : frames) total += f.board_points.size();
  if (total < opts.min_points) {
    throw InsufficientPointsError("solver needs at least " +
                                  std::to_string(opts.min_points) +
                                  " board points, got " + std::to_string(total));
  }

  ExtrinsicEstimate est;
  est.observability = observability_check(frames);

  RigidTransform x = opts.initial_guess.value_or(
      RigidTransform(Matrix3::Identity(), Vector3::Zero(), Frame::kLiDAR,
                     Frame::kCamera));
  double cost = cost_at(x, frames, opts.huber_delta);
  est.initial_cost = cost;

  double damping = -1.0;
  double damping_floor = 0.0;
  int iter = 0;
  bool converged = cost == 0.0;
  while (!converged && iter < opts.max_iterations) {
    ++iter;
    const NormalEquations ne = build_normal_equations(x, frames, opts.huber_delta);
    const double scale = std::max(ne.h.diagonal().maxCoeff(), 1e-300);
    if (damping < 0.0) {
      damping = opts.damping_init * scale;
      damping_floor = 1e-12 * scale;
    }

    bool accepted = false;
    Vector6 step = Vector6::Zero();
    double new_cost = cost;
    RigidTransform candidate = x;
    while (!accepted) {
      Eigen::Matrix<double, 6, 6> a = ne.h;
      a.diagonal().array() += damping;
      step = -a.ldlt().solve(ne.g);
      candidate = apply_increment(x, step);
      new_cost = cost_at(candidate, frames, opts.huber_delta);
      if (new_cost < cost) {
        accepted = true;
        damping = std::max(damping / 10.0, damping_floor);
      } else {
        damping *= 10.0;
        if (damping > kMaxDamping * scale) break;
      }
    }
    if (!accepted) {
      // No descent direction left at working precision.
      converged = true;
      break;
    }
    const double decrease = (cost - new_cost) / std::max(cost, 1e-300);
    x = candidate;
    cost = new_cost;
    if (step.norm() < opts.parameter_tolerance ||
        decrease < opts.residual_tolerance || cost == 0.0) {
      converged = true;
    }
  }

  est.transform = x;
  est.final_cost = cost;
  est.iterations = iter;
  est.converged = converged;
  const Eigen::VectorXd r = coplanar_residuals(x, frames);
  est.rms_residual = std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
  return est;
}

}  // namespace yoco
