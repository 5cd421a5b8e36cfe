#include "semslam/simgen/world.h"

#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "support/test_support.h"

namespace semslam::simgen {
namespace {

// Number of connected groups under a fixed link distance (union-find).
int CountClusters(const std::vector<Eigen::Vector3d>& points, double link) {
  std::vector<int> parent(points.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if ((points[i] - points[j]).norm() <= link) parent[find(i)] = find(j);
    }
  }
  std::set<int> roots;
  for (std::size_t i = 0; i < points.size(); ++i) roots.insert(find(i));
  return static_cast<int>(roots.size());
}

World Empty() {
  World world;
  world.has_ground = false;
  return world;
}

TEST(GenerateWorld, CountsAndDeterminism) {
  const WorldSpec spec{5, 7, 3, 4, 2};
  const World a = GenerateWorld(3, spec, 40.0);
  const World b = GenerateWorld(3, spec, 40.0);
  EXPECT_EQ(a.walls.size(), 8u);
  EXPECT_EQ(a.cylinders.size(), 7u);
  EXPECT_EQ(a.boxes.size(), 6u);
  int moving = 0;
  for (const auto& box : a.boxes) moving += box.label == kitti_labels::kMovingCar;
  EXPECT_EQ(moving, 2);
  int signs = 0;
  for (const auto& w : a.walls) signs += w.label == kitti_labels::kTrafficSign;
  EXPECT_EQ(signs, 3);
  const auto pa = SampleWorld(a, 0.5);
  const auto pb = SampleWorld(b, 0.5);
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i].position, pb[i].position);
  for (const auto& c : a.cylinders) {
    EXPECT_LE(c.center.cwiseAbs().maxCoeff(), 40.0);
  }
  EXPECT_NE(GenerateWorld(4, spec, 40.0).walls[0].center, a.walls[0].center);
}

TEST(GenerateWorld, ZeroCountsGiveGroundOnly) {
  const World world = GenerateWorld(1, {}, 10.0);
  EXPECT_TRUE(world.walls.empty());
  EXPECT_TRUE(world.cylinders.empty());
  EXPECT_TRUE(world.boxes.empty());
  for (const auto& p : SampleWorld(world, 1.0)) {
    EXPECT_EQ(p.label, kitti_labels::kRoad);
    EXPECT_EQ(p.position.z(), 0.0);
  }
  EXPECT_THROW(GenerateWorld(1, {}, 0.0), ConfigError);
}

TEST(GenerateWorld, PoleClustersMatchCount) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    World world = GenerateWorld(seed, {0, 6, 0, 0, 0}, 30.0);
    world.has_ground = false;
    std::vector<Eigen::Vector3d> points;
    for (const auto& p : SampleWorld(world, 0.2)) {
      EXPECT_EQ(p.label, kitti_labels::kPole);
      points.push_back(p.position);
    }
    int separated = 0;
    for (std::size_t i = 0; i < world.cylinders.size(); ++i) {
      bool alone = true;
      for (std::size_t j = 0; j < i; ++j) {
        alone &= (world.cylinders[i].center - world.cylinders[j].center).norm() > 1.0;
      }
      separated += alone;
    }
    EXPECT_EQ(CountClusters(points, 0.5), separated);
  }
}

TEST(CastRay, GroundAndMaxDistance) {
  World world;
  world.ground_extent = 50.0;
  const auto down = CastRay(world, {1.0, 2.0, 2.0}, {0.0, 0.0, -1.0}, 10.0);
  ASSERT_TRUE(down.has_value());
  EXPECT_NEAR(down->distance, 2.0, 1e-12);
  EXPECT_EQ(down->label, kitti_labels::kRoad);
  const Eigen::Vector3d slant = Eigen::Vector3d(1.0, 0.0, -1.0).normalized();
  const auto hit = CastRay(world, {0.0, 0.0, 1.5}, slant, 10.0);
  ASSERT_TRUE(hit.has_value());
  EXPECT_NEAR(hit->distance, 1.5 * std::sqrt(2.0), 1e-12);
  EXPECT_FALSE(CastRay(world, {0.0, 0.0, 1.5}, slant, 2.0));
  EXPECT_FALSE(CastRay(world, {0.0, 0.0, 1.5}, {0.0, 0.0, 1.0}, 100.0));
  // Beyond the ground extent.
  EXPECT_FALSE(CastRay(world, {60.0, 0.0, 1.0}, {0.0, 0.0, -1.0}, 10.0));
}

TEST(CastRay, Primitives) {
  World world = Empty();
  world.walls.push_back({{5.0, 0.0}, std::numbers::pi / 2, 4.0, 0.0, 3.0,
                         kitti_labels::kBuilding});
  world.cylinders.push_back({{0.0, 6.0}, 0.5, 0.0, 4.0, kitti_labels::kPole});
  world.boxes.push_back({{-8.0, 0.0}, 0.0, {4.0, 2.0, 1.5}, kitti_labels::kCar});
  const Eigen::Vector3d o(0.0, 0.0, 1.0);

  auto wall = CastRay(world, o, {1.0, 0.0, 0.0}, 50.0);
  ASSERT_TRUE(wall.has_value());
  EXPECT_NEAR(wall->distance, 5.0, 1e-12);
  EXPECT_EQ(wall->label, kitti_labels::kBuilding);
  // Past the wall's edge and above its top.
  EXPECT_FALSE(CastRay(world, {0.0, 2.5, 1.0}, {1.0, 0.0, 0.0}, 50.0));
  EXPECT_FALSE(CastRay(world, {0.0, 0.0, 3.5}, {1.0, 0.0, 0.0}, 50.0));

  auto pole = CastRay(world, o, {0.0, 1.0, 0.0}, 50.0);
  ASSERT_TRUE(pole.has_value());
  EXPECT_NEAR(pole->distance, 5.5, 1e-12);
  EXPECT_EQ(pole->label, kitti_labels::kPole);

  auto car = CastRay(world, o, {-1.0, 0.0, 0.0}, 50.0);
  ASSERT_TRUE(car.has_value());
  EXPECT_NEAR(car->distance, 6.0, 1e-12);
  EXPECT_EQ(car->label, kitti_labels::kCar);
  EXPECT_FALSE(CastRay(world, {0.0, 0.0, 1.6}, {-1.0, 0.0, 0.0}, 50.0));
}

TEST(CastRay, NearestOfOverlapping) {
  World world = Empty();
  world.walls.push_back({{8.0, 0.0}, std::numbers::pi / 2, 10.0, 0.0, 5.0,
                         kitti_labels::kBuilding});
  world.walls.push_back({{4.0, 0.0}, std::numbers::pi / 2, 1.0, 0.0, 5.0,
                         kitti_labels::kTrafficSign});
  const auto hit = CastRay(world, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}, 50.0);
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ(hit->label, kitti_labels::kTrafficSign);
  EXPECT_NEAR(hit->distance, 4.0, 1e-12);
}

TEST(CastRay, HitPointLiesOnSurface) {
  const World world = GenerateWorld(9, {6, 8, 3, 5, 0}, 20.0);
  std::mt19937_64 rng(10);
  int hits = 0;
  for (int i = 0; i < 2000; ++i) {
    const Eigen::Vector3d origin(0.0, 0.0, 1.7);
    const Eigen::Vector3d dir = testing::RandomUnitVector(rng);
    const auto hit = CastRay(world, origin, dir, 60.0);
    if (!hit) continue;
    ++hits;
    EXPECT_GT(hit->distance, 0.0);
    EXPECT_LE(hit->distance, 60.0);
    EXPECT_LT(SurfaceDistance(world, origin + hit->distance * dir), 1e-9);
  }
  EXPECT_GT(hits, 900);
}

TEST(SurfaceDistance, Examples) {
  World world;
  world.ground_extent = 50.0;
  EXPECT_NEAR(SurfaceDistance(world, {1.0, 1.0, 2.5}), 2.5, 1e-12);
  world.cylinders.push_back({{0.0, 0.0}, 0.5, 0.0, 4.0, kitti_labels::kPole});
  EXPECT_NEAR(SurfaceDistance(world, {2.0, 0.0, 3.0}), 1.5, 1e-12);
  EXPECT_NEAR(SurfaceDistance(world, {0.5, 0.0, 2.0}), 0.0, 1e-12);
}

TEST(SampleWorld, SamplesLieOnSurfaces) {
  const World world = GenerateWorld(11, {4, 4, 2, 3, 1}, 15.0);
  const auto points = SampleWorld(world, 0.3);
  ASSERT_GT(points.size(), 1000u);
  std::set<Label> labels;
  for (const auto& p : points) {
    EXPECT_LT(SurfaceDistance(world, p.position), 1e-9);
    labels.insert(p.label);
  }
  EXPECT_EQ(labels, (std::set<Label>{kitti_labels::kRoad, kitti_labels::kBuilding,
                                     kitti_labels::kPole, kitti_labels::kTrafficSign,
                                     kitti_labels::kCar, kitti_labels::kMovingCar}));
  EXPECT_THROW(SampleWorld(world, 0.0), ConfigError);
}

TEST(StructuredScene, DeterministicAndOnSurfaces) {
  const World world = MakeStructuredWorld();
  const auto a = MakeStructuredScene(5, 0.5);
  const auto b = MakeStructuredScene(5, 0.5);
  const auto c = MakeStructuredScene(6, 0.5);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_GE(a.size(), 2000u);
  EXPECT_GE(MakeStructuredScene(1).size(), 2000u);
  int moved = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].position, b[i].position);
    EXPECT_LT(SurfaceDistance(world, a[i].position), 1e-9);
    moved += a[i].position != c[i].position;
  }
  EXPECT_GT(moved, static_cast<int>(a.size()) / 2);
}

TEST(LoopWorld, ObjectsLineThePath) {
  const double side = 100.0;
  const World world = MakeLoopWorld(7, side, 10.0);
  std::map<Label, int> counts;
  for (const auto& w : world.walls) ++counts[w.label];
  for (const auto& c : world.cylinders) ++counts[c.label];
  for (const auto& b : world.boxes) ++counts[b.label];
  EXPECT_GT(counts[kitti_labels::kBuilding], 16);
  EXPECT_GT(counts[kitti_labels::kPole], 8);
  EXPECT_GT(counts[kitti_labels::kTrafficSign], 0);
  EXPECT_GT(counts[kitti_labels::kCar], 0);
  // Nothing blocks the road: every object is at least 2 m off the square path.
  for (const auto& c : world.cylinders) {
    const double d = std::abs(c.center.cwiseAbs().maxCoeff() - 0.5 * side);
    EXPECT_GT(d, 2.0);
  }
  const World again = MakeLoopWorld(7, side, 10.0);
  ASSERT_EQ(again.walls.size(), world.walls.size());
  EXPECT_EQ(again.walls.back().center, world.walls.back().center);
}

}  // namespace
}  // namespace semslam::simgen
