#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "yoco/geometry.hpp"

namespace yoco {

/// Static 3-D k-d tree over a copy of the input points. Query results are
/// deterministic: ties in distance are broken by point index.
class KdTree {
 public:
  explicit KdTree(std::span<const Point3> points, std::size_t leaf_size = 12);

  std::size_t size() const noexcept { return points_.size(); }

  /// The `k` nearest points to `query` (the query itself included when it is
  /// part of the set), ordered by (distance, index).
  void knn(const Point3& query, std::size_t k,
           std::vector<std::size_t>& out) const;

  /// All points with distance <= radius, in ascending index order.
  void radius(const Point3& query, double radius,
              std::vector<std::size_t>& out) const;

  std::size_t radius_count(const Point3& query, double radius) const;

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = 0;
    double split = 0.0;
    Eigen::Vector3d lo;
    Eigen::Vector3d hi;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_;
};

}  // namespace yoco
