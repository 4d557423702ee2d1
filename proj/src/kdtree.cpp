#include "yoco/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <utility>

namespace yoco {

namespace {

double box_distance_sq(const Point3& q, const Eigen::Vector3d& lo,
                       const Eigen::Vector3d& hi) {
  double d = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double v = q[a] < lo[a] ? lo[a] - q[a] : (q[a] > hi[a] ? q[a] - hi[a] : 0.0);
    d += v * v;
  }
  return d;
}

}  // namespace

KdTree::KdTree(std::span<const Point3> points, std::size_t leaf_size)
    : points_(points.begin(), points.end()),
      leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  if (points_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidArgument("point cloud too large for the k-d tree");
  }
  order_.resize(points_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / leaf_size_ + 1);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  Node node;
  node.begin = begin;
  node.end = end;
  node.lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  node.hi = -node.lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    node.lo = node.lo.cwiseMin(points_[order_[i]]);
    node.hi = node.hi.cwiseMax(points_[order_[i]]);
  }
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);

  if (end - begin <= leaf_size_) return id;

  int axis = 0;
  (node.hi - node.lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double va = points_[a][axis];
                     const double vb = points_[b][axis];
                     return va < vb || (va == vb && a < b);
                   });
  nodes_[id].axis = axis;
  nodes_[id].split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::knn(const Point3& query, std::size_t k,
                 std::vector<std::size_t>& out) const {
  out.clear();
  if (nodes_.empty() || k == 0) return;

  using Entry = std::pair<double, std::uint32_t>;
  std::priority_queue<Entry> best;  // max-heap on (dist, index)

  const auto worst = [&]() {
    return best.size() < k ? std::numeric_limits<double>::infinity()
                           : best.top().first;
  };

  std::vector<std::int32_t> stack;
  stack.push_back(0);
  while (!stack.empty()) {
    const Node& node = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (box_distance_sq(query, node.lo, node.hi) > worst()) continue;
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t idx = order_[i];
        const Entry e{(points_[idx] - query).squaredNorm(), idx};
        if (best.size() < k) {
          best.push(e);
        } else if (e < best.top()) {
          best.pop();
          best.push(e);
        }
      }
      continue;
    }
    // Visit the nearer child first.
    const bool go_left = query[node.axis] < node.split;
    stack.push_back(go_left ? node.right : node.left);
    stack.push_back(go_left ? node.left : node.right);
  }

  std::vector<Entry> sorted;
  sorted.reserve(best.size());
  while (!best.empty()) {
    sorted.push_back(best.top());
    best.pop();
  }
  out.reserve(sorted.size());
  for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
    out.push_back(it->second);
  }
}

void KdTree::radius(const Point3& query, double radius,
                    std::vector<std::size_t>& out) const {
  out.clear();
  if (nodes_.empty()) return;
  const double r2 = radius * radius;
  std::vector<std::int32_t> stack;
  stack.push_back(0);
  while (!stack.empty()) {
    const Node& node = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (box_distance_sq(query, node.lo, node.hi) > r2) continue;
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t idx = order_[i];
        if ((points_[idx] - query).squaredNorm() <= r2) out.push_back(idx);
      }
      continue;
    }
    stack.push_back(node.left);
    stack.push_back(node.right);
  }
  std::sort(out.begin(), out.end());
}

std::size_t KdTree::radius_count(const Point3& query, double radius) const {
  if (nodes_.empty()) return 0;
  const double r2 = radius * radius;
  std::size_t count = 0;
  std::vector<std::int32_t> stack;
  stack.push_back(0);
  while (!stack.empty()) {
    const Node& node = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (box_distance_sq(query, node.lo, node.hi) > r2) continue;
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        if ((points_[order_[i]] - query).squaredNorm() <= r2) ++count;
      }
      continue;
    }
    stack.push_back(node.left);
    stack.push_back(node.right);
  }
  return count;
}

}  // namespace yoco
