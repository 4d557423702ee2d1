#include "yoco/extraction.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "yoco/kdtree.hpp"
#include "yoco/parallel.hpp"

namespace yoco {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kMinInlierRatio = 0.2;
constexpr std::uint64_t kRansacStage = 0x52414e53u;  // "RANS"

struct PlaneFit {
  Vector3 normal;
  double offset;
};

// Least-squares plane through `indices` (smallest scatter eigenvector).
PlaneFit fit_plane_lsq(const PointCloud& cloud,
                       std::span<const std::size_t> indices) {
  Point3 centroid = Point3::Zero();
  for (const auto i : indices) centroid += cloud.points[i];
  centroid /= static_cast<double>(indices.size());
  Matrix3 scatter = Matrix3::Zero();
  for (const auto i : indices) {
    const Vector3 d = cloud.points[i] - centroid;
    scatter.noalias() += d * d.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Matrix3> es(scatter);
  const Vector3 n = es.eigenvectors().col(0).normalized();
  return {n, n.dot(centroid)};
}

std::uint64_t hash_indices(std::span<const std::size_t> indices) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto i : indices) {
    std::uint64_t v = i;
    for (int b = 0; b < 8; ++b) {
      h ^= v & 0xffu;
      h *= 0x100000001b3ull;
      v >>= 8;
    }
  }
  return h;
}

void collect_inliers(const PointCloud& cloud,
                     std::span<const std::size_t> members, const Vector3& n,
                     double offset, double threshold,
                     std::vector<std::size_t>& out) {
  out.clear();
  for (const auto i : members) {
    if (std::abs(n.dot(cloud.points[i]) - offset) <= threshold) out.push_back(i);
  }
}

std::size_t count_inliers(const PointCloud& cloud,
                          std::span<const std::size_t> members, const Vector3& n,
                          double offset, double threshold) {
  std::size_t count = 0;
  for (const auto i : members) {
    if (std::abs(n.dot(cloud.points[i]) - offset) <= threshold) ++count;
  }
  return count;
}

bool lexicographic_less(const Point3& a, const Point3& b) {
  if (a.x() != b.x()) return a.x() < b.x();
  if (a.y() != b.y()) return a.y() < b.y();
  return a.z() < b.z();
}

}  // namespace

void ExtractionParams::validate() const {
  if (knn_k < 3) throw InvalidArgument("knn_k must be at least 3");
  if (!(dbscan_eps > 0.0)) throw InvalidArgument("dbscan_eps must be positive");
  if (dbscan_min_pts < 1) throw InvalidArgument("dbscan_min_pts must be positive");
  if (!(normal_angle_merge_deg > 0.0)) {
    throw InvalidArgument("normal_angle_merge_deg must be positive");
  }
  if (!(ransac_threshold > 0.0)) {
    throw InvalidArgument("ransac_threshold must be positive");
  }
  if (ransac_iterations < 1) {
    throw InvalidArgument("ransac_iterations must be positive");
  }
  if (!(theta_deg > 0.0 && theta_deg < 90.0)) {
    throw InvalidArgument("theta_deg must lie in (0, 90)");
  }
  if (!(distance_tolerance > 0.0)) {
    throw InvalidArgument("distance_tolerance must be positive");
  }
  if (jobs < 1) throw InvalidArgument("jobs must be positive");
}

NormalEstimate estimate_normals(const PointCloud& cloud, int k,
                                double density_radius, int jobs) {
  if (k < 3) throw InsufficientPointsError("normal estimation needs k >= 3");
  if (cloud.size() < static_cast<std::size_t>(k) + 1) {
    throw InsufficientPointsError("normal estimation needs at least " +
                                  std::to_string(k + 1) + " points, got " +
                                  std::to_string(cloud.size()));
  }
  const KdTree tree(cloud.points);
  NormalEstimate out;
  out.normals.resize(cloud.size());
  out.neighbor_count.resize(cloud.size());

  parallel_for(cloud.size(), jobs, [&](std::size_t i) {
    thread_local std::vector<std::size_t> nn;
    const Point3& p = cloud.points[i];
    tree.knn(p, static_cast<std::size_t>(k) + 1, nn);

    Point3 mean = Point3::Zero();
    for (const auto j : nn) mean += cloud.points[j];
    mean /= static_cast<double>(nn.size());
    Matrix3 scatter = Matrix3::Zero();
    for (const auto j : nn) {
      const Vector3 d = cloud.points[j] - mean;
      scatter.noalias() += d * d.transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Matrix3> es(scatter);
    Vector3 n = es.eigenvectors().col(0);
    if (n.dot(-p) < 0.0) n = -n;
    out.normals[i] = UnitVector3(n);
    out.neighbor_count[i] =
        static_cast<int>(tree.radius_count(p, density_radius)) - 1;
  });
  return out;
}

NormalEstimate estimate_normals(const PointCloud& cloud,
                                const ExtractionParams& params) {
  return estimate_normals(cloud, params.knn_k, params.dbscan_eps, params.jobs);
}

UnitVector3 representative_normal(std::span<const std::size_t> members,
                                  const NormalEstimate& normals) {
  if (members.empty()) {
    throw DegenerateError("representative normal of an empty cluster");
  }
  Vector3 sum = Vector3::Zero();
  for (const auto i : members) {
    sum += static_cast<double>(normals.neighbor_count[i]) * normals.normals[i].vec();
  }
  if (sum.norm() < 1e-12) {
    throw DegenerateError("weighted cluster normals cancel out");
  }
  return UnitVector3(sum);
}

UnitVector3 representative_normal(const Cluster& cluster,
                                  const NormalEstimate& normals) {
  return representative_normal(cluster.members, normals);
}

std::vector<Cluster> cluster_points(const PointCloud& cloud,
                                    const NormalEstimate& normals,
                                    const ExtractionParams& params) {
  if (normals.normals.size() != cloud.size()) {
    throw InvalidArgument("normals were not computed for this cloud");
  }
  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  const double cos_merge = std::cos(params.normal_angle_merge_deg * kDegToRad);
  const auto min_pts = static_cast<std::size_t>(params.dbscan_min_pts);

  const KdTree tree(cloud.points);
  std::vector<int> label(cloud.size(), kUnvisited);
  std::vector<std::size_t> raw;

  const auto region = [&](std::size_t i, std::vector<std::size_t>& out) {
    tree.radius(cloud.points[i], params.dbscan_eps, raw);
    out.clear();
    const Vector3& ni = normals.normals[i].vec();
    for (const auto j : raw) {
      if (ni.dot(normals.normals[j].vec()) >= cos_merge) out.push_back(j);
    }
  };

  int cluster_count = 0;
  std::vector<std::size_t> seeds;
  std::vector<std::size_t> nbrs;
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (label[i] != kUnvisited) continue;
    region(i, seeds);
    if (seeds.size() < min_pts) {
      label[i] = kNoise;
      continue;
    }
    const int c = cluster_count++;
    label[i] = c;
    queue.assign(seeds.begin(), seeds.end());
    while (!queue.empty()) {
      const std::size_t j = queue.front();
      queue.pop_front();
      if (label[j] == kNoise) label[j] = c;  // border point
      if (label[j] != kUnvisited) continue;
      label[j] = c;
      region(j, nbrs);
      if (nbrs.size() >= min_pts) {
        for (const auto q : nbrs) {
          if (label[q] == kUnvisited || label[q] == kNoise) queue.push_back(q);
        }
      }
    }
  }

  std::vector<Cluster> clusters(static_cast<std::size_t>(cluster_count));
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (label[i] >= 0) clusters[static_cast<std::size_t>(label[i])].members.push_back(i);
  }
  for (auto& c : clusters) {
    c.representative_normal = representative_normal(c.members, normals);
  }
  return clusters;
}

PlaneCandidate fit_plane_ransac(const Cluster& cluster, const PointCloud& cloud,
                                const ExtractionParams& params,
                                std::uint64_t seed) {
  const auto& members = cluster.members;
  if (members.size() < 3) {
    throw NoPlaneError("cluster has fewer than 3 points");
  }
  const double thr = params.ransac_threshold;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);

  bool found = false;
  std::size_t best_count = 0;
  std::uint64_t best_hash = 0;
  PlaneFit best{Vector3::UnitZ(), 0.0};
  std::vector<std::size_t> scratch;

  const long max_attempts = 20L * params.ransac_iterations;
  int rounds = 0;
  for (long attempt = 0; attempt < max_attempts && rounds < params.ransac_iterations;
       ++attempt) {
    const std::size_t a = pick(rng);
    const std::size_t b = pick(rng);
    const std::size_t c = pick(rng);
    if (a == b || b == c || a == c) continue;
    const Point3& pa = cloud.points[members[a]];
    const Vector3 ab = cloud.points[members[b]] - pa;
    const Vector3 ac = cloud.points[members[c]] - pa;
    const Vector3 cr = ab.cross(ac);
    const double scale = std::max(ab.squaredNorm(), ac.squaredNorm());
    if (!(cr.norm() > 1e-9 * scale) || scale == 0.0) continue;  // collinear
    ++rounds;

    const Vector3 n = cr.normalized();
    const double off = n.dot(pa);
    const std::size_t count = count_inliers(cloud, members, n, off, thr);
    if (!found || count > best_count) {
      found = true;
      best_count = count;
      best = {n, off};
      best_hash = 0;
      collect_inliers(cloud, members, n, off, thr, scratch);
      best_hash = hash_indices(scratch);
    } else if (count == best_count) {
      collect_inliers(cloud, members, n, off, thr, scratch);
      const std::uint64_t h = hash_indices(scratch);
      if (h < best_hash) {
        best = {n, off};
        best_hash = h;
      }
    }
  }
  if (!found) {
    throw NoPlaneError("no non-collinear sample found in cluster");
  }

  // Least-squares refinement until the inlier set stops changing.
  std::vector<std::size_t> inliers;
  collect_inliers(cloud, members, best.normal, best.offset, thr, inliers);
  PlaneFit plane = best;
  std::vector<std::size_t> next;
  for (int iter = 0; iter < 20 && inliers.size() >= 3; ++iter) {
    const PlaneFit refit = fit_plane_lsq(cloud, inliers);
    collect_inliers(cloud, members, refit.normal, refit.offset, thr, next);
    if (next.size() < 3) break;
    plane = refit;
    if (next == inliers) break;
    inliers.swap(next);
  }
  collect_inliers(cloud, members, plane.normal, plane.offset, thr, inliers);

  if (static_cast<double>(inliers.size()) <
      kMinInlierRatio * static_cast<double>(members.size())) {
    throw NoPlaneError("best plane holds only " + std::to_string(inliers.size()) +
                       " of " + std::to_string(members.size()) + " points");
  }

  // Orient toward the sensor: points satisfy normal . p = offset <= 0.
  if (plane.offset > 0.0) {
    plane.normal = -plane.normal;
    plane.offset = -plane.offset;
  }

  PlaneCandidate out;
  out.normal = UnitVector3(plane.normal);
  out.offset = plane.offset;
  out.inliers = std::move(inliers);
  out.density = out.inliers.size();
  out.distance = plane_distance(out, cloud);
  return out;
}

double tilt_angle(const UnitVector3& n, const UnitVector3& reference_axis) {
  const double c = std::clamp(std::abs(n.dot(reference_axis)), 0.0, 1.0);
  return std::acos(c) / kDegToRad;
}

std::vector<PlaneCandidate> filter_planes(std::span<const PlaneCandidate> candidates,
                                          const ExtractionParams& params) {
  std::vector<PlaneCandidate> out;
  for (const auto& c : candidates) {
    if (c.alpha_deg <= params.theta_deg) out.push_back(c);
  }
  return out;
}

double plane_distance(const PlaneCandidate& candidate, const PointCloud& cloud) {
  if (candidate.inliers.empty()) {
    throw InvalidArgument("plane distance of a candidate without inliers");
  }
  Vector3 sum = Vector3::Zero();
  for (const auto i : candidate.inliers) sum += cloud.points[i];
  return std::sqrt(sum.dot(sum)) / static_cast<double>(candidate.inliers.size());
}

BoardSelection select_board_plane(std::span<const PlaneCandidate> filtered,
                                  double l, const ExtractionParams& params) {
  if (filtered.empty()) {
    throw InvalidArgument("no candidate planes to select from");
  }
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < filtered.size(); ++i) {
    const double gap = std::abs(filtered[i].distance - l);
    if (gap > params.distance_tolerance) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& b = filtered[*best];
    const double best_gap = std::abs(b.distance - l);
    if (filtered[i].density > b.density ||
        (filtered[i].density == b.density && gap < best_gap)) {
      best = i;
    }
  }
  if (best) return {*best, false};

  std::size_t closest = 0;
  for (std::size_t i = 1; i < filtered.size(); ++i) {
    if (std::abs(filtered[i].distance - l) <
        std::abs(filtered[closest].distance - l)) {
      closest = i;
    }
  }
  return {closest, true};
}

ExtractionResult extract_board(const PointCloud& cloud, double l,
                               const ExtractionParams& params) {
  params.validate();
  ExtractionResult result;
  auto& diag = result.diagnostics;
  diag.input_points = cloud.size();
  diag.prior_distance = l;

  // Ingest: drop range-0 points, then sort canonically so that every later
  // stage is independent of the input order.
  std::vector<std::size_t> order;
  order.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud.points[i];
    if (!is_finite(p)) {
      throw ExtractionError(ExtractionStage::kIngest,
                            "non-finite point at index " + std::to_string(i));
    }
    if (p.squaredNorm() > 0.0) order.push_back(i);
  }
  diag.dropped_points = cloud.size() - order.size();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lexicographic_less(cloud.points[a], cloud.points[b]);
  });
  if (order.size() < static_cast<std::size_t>(params.knn_k) + 1) {
    throw ExtractionError(ExtractionStage::kIngest,
                          "cloud has " + std::to_string(order.size()) +
                              " usable points, need at least " +
                              std::to_string(params.knn_k + 1));
  }
  PointCloud sorted;
  sorted.frame = cloud.frame;
  sorted.points.reserve(order.size());
  for (const auto i : order) sorted.points.push_back(cloud.points[i]);

  NormalEstimate normals;
  try {
    normals = estimate_normals(sorted, params);
  } catch (const Error& e) {
    throw ExtractionError(ExtractionStage::kNormals, e.what());
  }

  std::vector<Cluster> clusters;
  try {
    clusters = cluster_points(sorted, normals, params);
  } catch (const DegenerateError& e) {
    throw ExtractionError(ExtractionStage::kClustering, e.what());
  }
  diag.cluster_count = clusters.size();
  if (clusters.empty()) {
    throw ExtractionError(ExtractionStage::kClustering, "no clusters found");
  }

  std::vector<std::optional<PlaneCandidate>> fits(clusters.size());
  parallel_for(clusters.size(), params.jobs, [&](std::size_t c) {
    try {
      PlaneCandidate pc = fit_plane_ransac(clusters[c], sorted, params,
                                           derive_seed(params.seed, kRansacStage, c));
      pc.cluster_index = c;
      pc.alpha_deg = tilt_angle(clusters[c].representative_normal,
                                params.reference_axis);
      fits[c] = std::move(pc);
    } catch (const NoPlaneError&) {
      // cluster is not planar enough; skipped
    }
  });

  std::vector<PlaneCandidate> candidates;
  for (auto& f : fits) {
    if (f) candidates.push_back(std::move(*f));
  }
  diag.failed_plane_fits = clusters.size() - candidates.size();
  for (const auto& c : candidates) {
    CandidateReport r;
    r.cluster_index = c.cluster_index;
    r.cluster_size = clusters[c.cluster_index].members.size();
    r.normal = c.normal;
    r.alpha_deg = c.alpha_deg;
    r.distance = c.distance;
    r.density = c.density;
    r.passed_angle_filter = c.alpha_deg <= params.theta_deg;
    r.within_tolerance = std::abs(c.distance - l) <= params.distance_tolerance;
    diag.candidates.push_back(r);
  }
  if (candidates.empty()) {
    throw ExtractionError(ExtractionStage::kPlaneFitting,
                          "no cluster yielded a plane");
  }

  const std::vector<PlaneCandidate> filtered = filter_planes(candidates, params);
  if (filtered.empty()) {
    throw ExtractionError(ExtractionStage::kAngleFilter,
                          "every plane is tilted more than " +
                              std::to_string(params.theta_deg) + " deg");
  }

  const BoardSelection sel = select_board_plane(filtered, l, params);
  const PlaneCandidate& chosen = filtered[sel.index];
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].cluster_index == chosen.cluster_index) diag.selected = i;
  }
  diag.low_confidence = sel.low_confidence;
  if (sel.low_confidence) {
    throw ExtractionError(
        ExtractionStage::kDistanceSelection,
        "no plane within " + std::to_string(params.distance_tolerance) +
            " m of the prior distance " + std::to_string(l) +
            " m (closest at " + std::to_string(chosen.distance) + " m)");
  }

  result.normal = chosen.normal;
  result.offset = chosen.offset;
  result.indices.reserve(chosen.inliers.size());
  for (const auto i : chosen.inliers) result.indices.push_back(order[i]);
  std::sort(result.indices.begin(), result.indices.end());
  result.board.frame = cloud.frame;
  result.board.points.reserve(result.indices.size());
  for (const auto i : result.indices) result.board.points.push_back(cloud.points[i]);
  return result;
}

PointCloud extract_board_points(const PointCloud& cloud, double l,
                                const ExtractionParams& params) {
  return extract_board(cloud, l, params).board;
}

}  // namespace yoco
