#include "semslam/local_map/voxel_map.h"

#include <random>

#include <gtest/gtest.h>

#include "support/test_support.h"

namespace semslam::local_map {
namespace {

LabeledPoint At(const Eigen::Vector3d& x, Label label = kitti_labels::kBuilding) {
  LabeledPoint p;
  p.position = x;
  p.label = label;
  return p;
}

TEST(SemanticVoxelMap, InsertOnePoint) {
  SemanticVoxelMap map(1.0, 20, 100.0);
  map.InsertScan(testing::MakeScan({At({0.5, 0.5, 0.5})}), Pose3::Identity());
  EXPECT_EQ(map.size(), 1u);
}

TEST(SemanticVoxelMap, DuplicateIsSkipped) {
  SemanticVoxelMap map(1.0, 20, 100.0);
  map.InsertPoint(At({0.5, 0.5, 0.5}));
  map.InsertPoint(At({0.5, 0.5, 0.5 + 1e-8}));
  EXPECT_EQ(map.size(), 1u);
}

TEST(SemanticVoxelMap, CapPerCell) {
  SemanticVoxelMap map(1.0, 20, 100.0, SemanticConfig::Default());
  for (int i = 0; i < 25; ++i) map.InsertPoint(At({0.03 * i + 0.01, 0.5, 0.5}));
  ASSERT_EQ(map.cell_count(), 1u);
  EXPECT_EQ(map.cells().begin()->second.size(), 20u);
  map.InsertPoint(At({0.9, 0.9, 0.9}, kitti_labels::kPole));
  EXPECT_EQ(map.cells().begin()->second.size(), 21u);
}

TEST(SemanticVoxelMap, InsertTransformsToWorld) {
  SemanticVoxelMap map(1.0, 20, 100.0);
  map.InsertScan(testing::MakeScan({At({1, 0, 0})}), Pose3::FromYaw(std::numbers::pi / 2, {3, 0, 0}));
  const auto nn = map.NearestNeighbor({3, 1, 0}, 0.1);
  ASSERT_TRUE(nn.has_value());
  EXPECT_LT(nn->distance, 1e-12);
}

TEST(SemanticVoxelMap, StoredPointsLieInTheirCell) {
  std::mt19937_64 rng(1);
  SemanticVoxelMap map(0.8, 5, 100.0, SemanticConfig::Default());
  map.InsertScan(testing::MakeScan(testing::RandomPoints(rng, 3000, 10.0, {40, 80})),
                 testing::RandomPose(rng, 1.0, 3.0));
  for (const auto& [key, points] : map.cells()) {
    int non_critical = 0;
    for (const auto& p : points) {
      EXPECT_EQ(map.KeyOf(p.position), key);
      non_critical += p.label != kitti_labels::kPole;
    }
    EXPECT_LE(non_critical, 5);
  }
}

TEST(NearestNeighbor, EmptyMap) {
  SemanticVoxelMap map(1.0, 20, 100.0);
  EXPECT_FALSE(map.NearestNeighbor({0, 0, 0}, 5.0).has_value());
}

TEST(NearestNeighbor, SinglePoint) {
  SemanticVoxelMap map(1.0, 20, 100.0);
  map.InsertPoint(At({0.4, 0, 0}));
  const auto nn = map.NearestNeighbor({0, 0, 0}, 0.5);
  ASSERT_TRUE(nn.has_value());
  EXPECT_NEAR(nn->distance, 0.4, 1e-15);
  EXPECT_FALSE(map.NearestNeighbor({0, 0, 0}, 0.3).has_value());
}

TEST(NearestNeighbor, MatchesBruteForce) {
  std::mt19937_64 rng(2);
  for (int instance = 0; instance < 100; ++instance) {
    SemanticVoxelMap map(0.5 + 0.01 * instance, 1000, 1000.0);
    for (const auto& p : testing::RandomPoints(rng, 1000, 10.0)) map.InsertPoint(p);
    const auto stored = map.Points();
    std::uniform_real_distribution<double> r(0.2, 6.0);
    for (const auto& q : testing::RandomPoints(rng, 100, 12.0)) {
      const double max_dist = r(rng);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : stored) best = std::min(best, (p.position - q.position).norm());
      const auto nn = map.NearestNeighbor(q.position, max_dist);
      if (best < max_dist) {
        ASSERT_TRUE(nn.has_value());
        ASSERT_EQ(nn->distance, best);
      } else {
        ASSERT_FALSE(nn.has_value());
      }
    }
  }
}

TEST(PruneFar, WithinRangeUnchanged) {
  SemanticVoxelMap map(1.0, 20, 50.0);
  std::mt19937_64 rng(3);
  for (const auto& p : testing::RandomPoints(rng, 500, 20.0)) map.InsertPoint(p);
  const auto before = map.size();
  map.PruneFar(Eigen::Vector3d::Zero());
  EXPECT_EQ(map.size(), before);
}

TEST(PruneFar, DistantCellRemoved) {
  SemanticVoxelMap map(1.0, 20, 50.0);
  map.InsertPoint(At({0.5, 0.5, 0.5}));
  map.InsertPoint(At({100.5, 0.5, 0.5}));
  map.PruneFar(Eigen::Vector3d::Zero());
  EXPECT_EQ(map.size(), 1u);
  EXPECT_EQ(map.cell_count(), 1u);
}

TEST(PruneFar, MatchesCellCenterFilter) {
  std::mt19937_64 rng(4);
  SemanticVoxelMap map(2.0, 3, 30.0);
  for (const auto& p : testing::RandomPoints(rng, 5000, 60.0)) map.InsertPoint(p);
  const Eigen::Vector3d center(5, -3, 1);
  std::size_t expected_points = 0, expected_cells = 0;
  for (const auto& [key, points] : map.cells()) {
    if ((map.CellCenter(key) - center).norm() <= 30.0) {
      ++expected_cells;
      expected_points += points.size();
    }
  }
  map.PruneFar(center);
  EXPECT_EQ(map.cell_count(), expected_cells);
  EXPECT_EQ(map.size(), expected_points);
  for (const auto& [key, points] : map.cells()) {
    EXPECT_LE((map.CellCenter(key) - center).norm(), 30.0);
  }
}

}  // namespace
}  // namespace semslam::local_map
