#pragma once

// Checkerboard plane extraction from a raw LiDAR cloud:
//
//   PCA normals -> DBSCAN on (position, normal) -> weighted representative
//   normal per cluster -> RANSAC plane per cluster -> tilt-angle filter ->
//   selection by centroid distance to the camera prior l, then density.
//
// All stages are deterministic for a fixed seed and independent of the
// input point order (the cloud is canonically sorted on entry).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "yoco/geometry.hpp"

namespace yoco {

struct ExtractionParams {
  int knn_k = 20;
  double dbscan_eps = 0.15;  // meters
  int dbscan_min_pts = 10;
  double normal_angle_merge_deg = 10.0;
  double ransac_threshold = 0.02;  // meters
  int ransac_iterations = 500;
  double theta_deg = 45.0;
  /// Axis the board normal is compared against. The LiDAR frame used here
  /// looks down +z, so the default is the viewing axis.
  UnitVector3 reference_axis{0.0, 0.0, 1.0};
  double distance_tolerance = 0.3;  // meters
  std::uint64_t seed = 0;
  int jobs = 1;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

struct NormalEstimate {
  std::vector<UnitVector3> normals;
  /// Neighbors within the density radius, excluding the point itself.
  std::vector<int> neighbor_count;
};

/// PCA normal of the k nearest neighbors (the point included), oriented
/// toward the sensor origin. Throws InsufficientPointsError when the cloud
/// has fewer than k + 1 points or k < 3.
NormalEstimate estimate_normals(const PointCloud& cloud, int k,
                                double density_radius, int jobs = 1);
NormalEstimate estimate_normals(const PointCloud& cloud,
                                const ExtractionParams& params);

struct Cluster {
  std::vector<std::size_t> members;
  UnitVector3 representative_normal;
};

/// DBSCAN where p and q are neighbors iff |p - q| <= eps and the angle
/// between their normals is <= normal_angle_merge_deg. Noise points belong
/// to no cluster. Clusters are returned with their representative normals.
std::vector<Cluster> cluster_points(const PointCloud& cloud,
                                    const NormalEstimate& normals,
                                    const ExtractionParams& params);

/// Density-weighted mean normal, sum(W_i N_i) / |sum(W_i N_i)| with
/// W_i = neighbor_count. Throws DegenerateError if the sum vanishes.
UnitVector3 representative_normal(std::span<const std::size_t> members,
                                  const NormalEstimate& normals);
UnitVector3 representative_normal(const Cluster& cluster,
                                  const NormalEstimate& normals);

struct PlaneCandidate {
  UnitVector3 normal;  // oriented toward the sensor origin
  double offset = 0.0;  // plane: normal . p = offset
  std::vector<std::size_t> inliers;  // ascending cloud indices
  double alpha_deg = 0.0;
  double distance = 0.0;
  std::size_t density = 0;
  std::size_t cluster_index = 0;
};

/// RANSAC over 3-point samples of the cluster members; keeps the hypothesis
/// with the most inliers (ties: lowest inlier-set hash), then refits by least
/// squares on the inliers until the inlier set is stable. Collinear samples
/// are redrawn. alpha_deg is left at 0 and distance is filled in.
/// Throws NoPlaneError if fewer than 20% of the members are inliers or no
/// non-degenerate sample exists.
PlaneCandidate fit_plane_ransac(const Cluster& cluster, const PointCloud& cloud,
                                const ExtractionParams& params,
                                std::uint64_t seed);

/// arccos(|n . axis|) in degrees, in [0, 90].
double tilt_angle(const UnitVector3& n, const UnitVector3& reference_axis);

/// Keeps candidates with alpha_deg <= theta_deg, preserving order.
std::vector<PlaneCandidate> filter_planes(std::span<const PlaneCandidate> candidates,
                                          const ExtractionParams& params);

/// Norm of the inlier centroid, i.e. (1/n) * sqrt(S^T S) with S the
/// coordinate-wise sum.
double plane_distance(const PlaneCandidate& candidate, const PointCloud& cloud);

struct BoardSelection {
  std::size_t index = 0;  // into the filtered list
  bool low_confidence = false;
};

/// Among candidates with |d - l| <= distance_tolerance picks the highest
/// density (ties: smaller |d - l|). If none is within tolerance, returns the
/// candidate closest to l flagged low_confidence. Throws InvalidArgument on
/// an empty list.
BoardSelection select_board_plane(std::span<const PlaneCandidate> filtered,
                                  double l, const ExtractionParams& params);

struct CandidateReport {
  std::size_t cluster_index = 0;
  std::size_t cluster_size = 0;
  UnitVector3 normal;
  double alpha_deg = 0.0;
  double distance = 0.0;
  std::size_t density = 0;
  bool passed_angle_filter = false;
  bool within_tolerance = false;
};

struct ExtractionDiagnostics {
  std::size_t input_points = 0;
  std::size_t dropped_points = 0;  // at the sensor origin
  std::size_t cluster_count = 0;
  std::size_t failed_plane_fits = 0;
  double prior_distance = 0.0;
  std::vector<CandidateReport> candidates;
  std::optional<std::size_t> selected;  // index into `candidates`
  bool low_confidence = false;
};

struct ExtractionResult {
  PointCloud board;
  std::vector<std::size_t> indices;  // into the input cloud, ascending
  UnitVector3 normal;
  double offset = 0.0;
  ExtractionDiagnostics diagnostics;
};

/// Full pipeline. Throws ExtractionError tagged with the stage at which no
/// usable data remained; a board outside distance_tolerance of `l` is a
/// failure, never a low-confidence pick.
ExtractionResult extract_board(const PointCloud& cloud, double l,
                               const ExtractionParams& params);

/// Same as extract_board, returning only the selected inlier points.
PointCloud extract_board_points(const PointCloud& cloud, double l,
                                const ExtractionParams& params);

}  // namespace yoco
