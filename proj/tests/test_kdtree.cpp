#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "test_util.hpp"
#include "yoco/kdtree.hpp"

namespace yoco {
namespace {

std::vector<Point3> random_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Point3> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(testing::random_vector(rng, 2.0));
  // Exact duplicates exercise the index tie-break.
  pts.push_back(pts[0]);
  pts.push_back(pts[0]);
  return pts;
}

TEST(KdTree, KnnMatchesBruteForce) {
  const auto pts = random_points(2000, 1);
  const KdTree tree(pts);
  std::mt19937_64 rng(2);
  std::vector<std::size_t> got;
  for (int q = 0; q < 100; ++q) {
    const Point3 query = q < 5 ? pts[static_cast<std::size_t>(q)] : testing::random_vector(rng, 2.5);
    for (const std::size_t k : {1u, 7u, 21u}) {
      tree.knn(query, k, got);
      std::vector<std::size_t> ref(pts.size());
      std::iota(ref.begin(), ref.end(), 0);
      std::sort(ref.begin(), ref.end(), [&](std::size_t a, std::size_t b) {
        const double da = (pts[a] - query).squaredNorm();
        const double db = (pts[b] - query).squaredNorm();
        return da < db || (da == db && a < b);
      });
      ref.resize(k);
      EXPECT_EQ(got, ref);
    }
  }
}

TEST(KdTree, RadiusMatchesBruteForce) {
  const auto pts = random_points(3000, 3);
  const KdTree tree(pts, 4);
  std::mt19937_64 rng(4);
  std::vector<std::size_t> got;
  for (int q = 0; q < 100; ++q) {
    const Point3 query = testing::random_vector(rng, 2.0);
    const double r = 0.05 + 0.01 * q;
    tree.radius(query, r, got);
    std::vector<std::size_t> ref;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if ((pts[i] - query).norm() <= r) ref.push_back(i);
    }
    EXPECT_EQ(got, ref);
    EXPECT_EQ(tree.radius_count(query, r), ref.size());
  }
}

TEST(KdTree, KLargerThanSetReturnsAll) {
  const std::vector<Point3> pts{Point3(0, 0, 0), Point3(1, 0, 0), Point3(2, 0, 0)};
  const KdTree tree(pts);
  std::vector<std::size_t> got;
  tree.knn(Point3(2.1, 0, 0), 10, got);
  EXPECT_EQ(got, (std::vector<std::size_t>{2, 1, 0}));
}

TEST(KdTree, EmptyTree) {
  const KdTree tree(std::span<const Point3>{});
  std::vector<std::size_t> got{1};
  tree.knn(Point3::Zero(), 3, got);
  EXPECT_TRUE(got.empty());
  EXPECT_EQ(tree.radius_count(Point3::Zero(), 1.0), 0u);
}

}  // namespace
}  // namespace yoco
