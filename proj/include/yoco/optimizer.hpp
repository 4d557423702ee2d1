#pragma once

// Co-planar extrinsic solver. Each extracted LiDAR board point p, chained
// LiDAR -> camera -> board, must land on the board plane:
//
//   z( R_WC (R_CL p + t_CL) + t_WC ) = 0
//
// solve_extrinsics minimizes the (Huber-robustified) sum of squared z
// residuals over all frames with Levenberg damping on a 6-vector chart
// [rotation increment (left, axis-angle), translation increment].

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "yoco/camera.hpp"
#include "yoco/geometry.hpp"

namespace yoco {

using Vector6 = Eigen::Matrix<double, 6, 1>;

struct CalibrationFrame {
  PointCloud board_points;  // LiDAR frame
  BoardPose board_pose;     // camera -> world
};

struct ObservabilityReport {
  int distinct_orientation_count = 0;
  std::array<double, 3> normal_gram_eigenvalues{};  // descending
  int rank_estimate = 0;
  std::optional<std::string> warning;
};

struct SolverOptions {
  int max_iterations = 100;
  double parameter_tolerance = 1e-12;
  double residual_tolerance = 1e-12;
  double damping_init = 1e-4;
  double huber_delta = 0.06;  // meters; 3x the default RANSAC threshold
  std::size_t min_points = 50;
  std::optional<RigidTransform> initial_guess;  // LiDAR -> camera

  void validate() const;
};

struct ExtrinsicEstimate {
  RigidTransform transform;  // LiDAR -> camera (R_CL, t_CL)
  double rms_residual = 0.0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  ObservabilityReport observability;
};

/// Checks frame labels and non-emptiness. Throws FrameMismatchError or
/// InvalidArgument.
void validate_frames(std::span<const CalibrationFrame> frames);

/// One residual per board point, in frame order then point order.
Eigen::VectorXd coplanar_residuals(const RigidTransform& lidar_to_camera,
                                   std::span<const CalibrationFrame> frames);

/// Analytic Jacobian of coplanar_residuals with respect to the increment
/// [omega, dt] applied as R <- exp(omega) R, t <- t + dt.
Eigen::MatrixXd coplanar_jacobian(const RigidTransform& lidar_to_camera,
                                  std::span<const CalibrationFrame> frames);

/// R <- exp(delta.head(3)) R, t <- t + delta.tail(3).
RigidTransform apply_increment(const RigidTransform& x, const Vector6& delta);

/// Huber objective: r^2/2 inside delta, delta(|r| - delta/2) outside.
double robust_cost(const Eigen::VectorXd& residuals, double huber_delta);

ObservabilityReport observability_check(std::span<const CalibrationFrame> frames);

/// Throws InsufficientPointsError below opts.min_points total points.
/// Non-convergence is reported through `converged`, not thrown.
ExtrinsicEstimate solve_extrinsics(std::span<const CalibrationFrame> frames,
                                   const SolverOptions& opts);

}  // namespace yoco
