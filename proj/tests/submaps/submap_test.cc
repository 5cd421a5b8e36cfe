#include "semslam/submaps/submap.h"

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "semslam/simgen/simulator.h"
#include "support/test_support.h"

namespace semslam::submaps {
namespace {

using testing::MakeScan;

LabeledPoint At(double x, double y, double z, Label label) {
  LabeledPoint p;
  p.position = {x, y, z};
  p.label = label;
  return p;
}

void ExpectSameGrid(const SemanticGrid& a, const SemanticGrid& b) {
  EXPECT_EQ(a.resolution(), b.resolution());
  EXPECT_EQ(a.min_index(), b.min_index());
  EXPECT_EQ(a.size(), b.size());
  EXPECT_EQ(a.local_pose().Matrix(), b.local_pose().Matrix());
  ASSERT_EQ(a.cells().size(), b.cells().size());
  for (std::size_t i = 0; i < a.cells().size(); ++i) {
    const auto& x = a.cells()[i];
    const auto& y = b.cells()[i];
    ASSERT_EQ(x.misses, y.misses) << i;
    ASSERT_EQ(x.hits.size(), y.hits.size()) << i;
    for (std::size_t k = 0; k < x.hits.size(); ++k) {
      EXPECT_EQ(x.hits[k].label, y.hits[k].label);
      EXPECT_EQ(x.hits[k].count, y.hits[k].count);
    }
  }
}

TEST(ProjectToGridPlane, HeightBandAndRange) {
  SubmapOptions options;
  const Pose3 sensor = Pose3::FromTranslation({0.0, 0.0, 1.7});
  Eigen::Vector2d out;
  EXPECT_TRUE(ProjectToGridPlane({2.0, 1.0, 0.5}, sensor, Pose3::Identity(), options, &out));
  EXPECT_TRUE(out.isApprox(Eigen::Vector2d(2.0, 1.0)));
  EXPECT_FALSE(ProjectToGridPlane({2.0, 1.0, 1.5}, sensor, Pose3::Identity(), options, &out));
  EXPECT_FALSE(ProjectToGridPlane({2.0, 1.0, -3.5}, sensor, Pose3::Identity(), options, &out));
  EXPECT_FALSE(ProjectToGridPlane({31.0, 0.0, 0.0}, sensor, Pose3::Identity(), options, &out));
  const Pose3 local = Pose3::FromYaw(std::numbers::pi / 2, {1.0, 0.0, 0.0});
  EXPECT_TRUE(ProjectToGridPlane({2.0, 0.0, 0.0}, sensor, local, options, &out));
  EXPECT_TRUE(out.isApprox(Eigen::Vector2d(0.0, -1.0)));
}

TEST(Submap, EmptyScanLeavesGridUnchanged) {
  Submap submap(Pose3::Identity());
  submap.InsertScan(MakeScan({}, 3), Pose3::Identity());
  EXPECT_EQ(submap.grid().TotalHits(), 0u);
  EXPECT_EQ(submap.grid().OccupiedCells(), 0u);
  EXPECT_EQ(submap.num_scans(), 1);
  EXPECT_EQ(submap.scan_range().first, 3);
  EXPECT_EQ(submap.scan_range().second, 3);
}

TEST(Submap, SinglePointOneHit) {
  Submap submap(Pose3::Identity());
  submap.InsertScan(MakeScan({At(4.0, 1.0, 0.0, kitti_labels::kPole)}), Pose3::Identity());
  EXPECT_EQ(submap.grid().TotalHits(), 1u);
  EXPECT_EQ(submap.grid().OccupiedCells(), 1u);
  const auto* cell = submap.grid().Cell(submap.grid().CellIndex({4.0, 1.0}));
  ASSERT_NE(cell, nullptr);
  EXPECT_EQ(cell->HitsFor(kitti_labels::kPole), 1u);
}

TEST(Submap, TotalHitsEqualsPointsInBand) {
  std::mt19937_64 rng(4);
  Submap submap(Pose3::FromYaw(0.3, {1.0, 2.0, 0.0}));
  std::size_t in_band = 0;
  for (int s = 0; s < 5; ++s) {
    const Pose3 pose = Pose3::FromYaw(0.1 * s, {0.5 * s, 0.0, 1.7});
    auto points = testing::RandomPoints(rng, 400, 20.0, {40, 50, 80});
    for (const auto& p : points) {
      Eigen::Vector2d unused;
      if (ProjectToGridPlane(p.position, pose, submap.local_pose(), submap.options(),
                             &unused)) {
        ++in_band;
      }
    }
    submap.InsertScan(MakeScan(points, s), pose);
  }
  EXPECT_GT(in_band, 0u);
  EXPECT_EQ(submap.grid().TotalHits(), in_band);
  EXPECT_EQ(submap.scan_range().first, 0);
  EXPECT_EQ(submap.scan_range().second, 4);
}

TEST(Submap, FinalizeIsIdempotentAndRejectsInsert) {
  Submap submap(Pose3::Identity());
  submap.Finalize();
  submap.Finalize();
  EXPECT_TRUE(submap.finished());
  EXPECT_EQ(submap.grid().OccupiedCells(), 0u);
  EXPECT_THROW(submap.InsertScan(MakeScan({At(1, 0, 0, 40)}), Pose3::Identity()), Error);
}

TEST(Submap, RoomFootprint) {
  // Square room, walls at |x| = 5 and |y| = 5, no ground.
  simgen::World world;
  world.has_ground = false;
  for (int k = 0; k < 4; ++k) {
    const double yaw = k * std::numbers::pi / 2;
    simgen::Wall wall;
    wall.center = 5.0 * Eigen::Vector2d(std::cos(yaw), std::sin(yaw));
    wall.yaw = yaw + std::numbers::pi / 2;
    wall.length = 10.0;
    world.walls.push_back(wall);
  }
  simgen::SensorModel model{32, 1440, -15.0 * std::numbers::pi / 180.0,
                            15.0 * std::numbers::pi / 180.0, 30.0};
  const Pose3 pose = Pose3::FromTranslation({0.3, -0.4, 1.5});
  const Scan scan = simgen::SimulateScan(world, pose, model, {}, 1);
  ASSERT_GT(scan.size(), 0u);

  Submap submap(Pose3::Identity());
  submap.InsertScan(scan, pose);
  const auto& grid = submap.grid();
  const double res = grid.resolution();

  auto footprint_distance = [](const Eigen::Vector2d& c) {
    const double dx = std::abs(std::abs(c.x()) - 5.0);
    const double dy = std::abs(std::abs(c.y()) - 5.0);
    const double along_x = std::max(0.0, std::abs(c.y()) - 5.0);
    const double along_y = std::max(0.0, std::abs(c.x()) - 5.0);
    return std::min(std::hypot(dx, along_x), std::hypot(dy, along_y));
  };

  std::size_t occupied = 0;
  for (int j = 0; j < grid.size().y(); ++j) {
    for (int i = 0; i < grid.size().x(); ++i) {
      const Eigen::Vector2i index = grid.min_index() + Eigen::Vector2i(i, j);
      const GridCell* cell = grid.Cell(index);
      if (cell->hits.empty()) continue;
      ++occupied;
      EXPECT_LE(footprint_distance(grid.CellCenter(index)), res * (0.5 * std::sqrt(2.0) + 1.0));
      EXPECT_EQ(DominantLabelOf(*cell).label, kitti_labels::kBuilding);
    }
  }
  // Every footprint sample has an occupied cell within one cell.
  for (double s = -4.95; s <= 4.95; s += 0.1) {
    for (const Eigen::Vector2d& p :
         {Eigen::Vector2d(5.0, s), Eigen::Vector2d(-5.0, s), Eigen::Vector2d(s, 5.0),
          Eigen::Vector2d(s, -5.0)}) {
      const Eigen::Vector2i c = grid.CellIndex(p);
      bool found = false;
      for (int dj = -1; dj <= 1 && !found; ++dj) {
        for (int di = -1; di <= 1 && !found; ++di) {
          const GridCell* cell = grid.Cell(c + Eigen::Vector2i(di, dj));
          found = cell != nullptr && !cell->hits.empty();
        }
      }
      EXPECT_TRUE(found) << p.transpose();
    }
  }
  EXPECT_GT(occupied, 380u);
  // The interior is observed free.
  const GridCell* center = grid.Cell(grid.CellIndex({0.0, 0.0}));
  ASSERT_NE(center, nullptr);
  EXPECT_GT(center->misses, 0u);
  EXPECT_EQ(center->TotalHits(), 0u);
}

TEST(SubmapIo, RoundTrip) {
  std::mt19937_64 rng(5);
  Submap submap(Pose3::FromYaw(-0.7, {3.0, -1.0, 0.2}));
  for (int s = 0; s < 3; ++s) {
    submap.InsertScan(MakeScan(testing::RandomPoints(rng, 300, 12.0, {10, 40, 50, 80, 81}),
                               10 + s),
                      Pose3::FromYaw(0.2 * s, {s * 0.4, 0.0, 1.7}));
  }
  submap.Finalize();

  const auto restored = DeserializeSubmap(SerializeSubmap(submap));
  ExpectSameGrid(submap.grid(), restored.grid());
  EXPECT_EQ(restored.scan_range(), submap.scan_range());
  EXPECT_EQ(restored.num_scans(), submap.num_scans());
  EXPECT_TRUE(restored.finished());
  EXPECT_EQ(SerializeSubmap(restored), SerializeSubmap(submap));

  testing::TempDir dir;
  WriteSubmap(submap, dir / "a.smap");
  ExpectSameGrid(ReadSubmap(dir / "a.smap").grid(), submap.grid());
}

TEST(SubmapIo, EmptyRoundTrip) {
  Submap submap(Pose3::Identity());
  const auto restored = DeserializeSubmap(SerializeSubmap(submap));
  EXPECT_EQ(restored.grid().cells().size(), 0u);
  EXPECT_EQ(restored.scan_range(), submap.scan_range());
  EXPECT_FALSE(restored.finished());
}

TEST(SubmapIo, RejectsCorruptBlobs) {
  Submap submap(Pose3::Identity());
  submap.InsertScan(MakeScan({At(2.0, 0.0, 0.0, 40)}), Pose3::Identity());
  const std::string blob = SerializeSubmap(submap);
  EXPECT_THROW(DeserializeSubmap("XXXX"), Error);
  EXPECT_THROW(DeserializeSubmap(blob.substr(0, blob.size() - 3)), Error);
  EXPECT_THROW(DeserializeSubmap(blob + "z"), Error);
  std::string bad_magic = blob;
  bad_magic[0] ^= 0x20;
  EXPECT_THROW(DeserializeSubmap(bad_magic), Error);
}

TEST(DominantLabelImage, HeaderAndSize) {
  Submap submap(Pose3::Identity());
  submap.InsertScan(MakeScan({At(1.0, 0.5, 0.0, 80), At(-0.5, 1.0, 0.0, 50)}),
                    Pose3::Identity());
  testing::TempDir dir;
  WriteDominantLabelImage(submap.grid(), dir / "g.ppm");
  const auto bytes = testing::ReadBytes(dir / "g.ppm");
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::string magic;
  int w = 0, h = 0, max = 0;
  in >> magic >> w >> h >> max;
  EXPECT_EQ(magic, "P6");
  EXPECT_EQ(w, submap.grid().size().x());
  EXPECT_EQ(h, submap.grid().size().y());
  EXPECT_EQ(max, 255);
  in.get();
  const auto header = static_cast<std::size_t>(in.tellg());
  EXPECT_EQ(bytes.size() - header, static_cast<std::size_t>(3 * w * h));
}

}  // namespace
}  // namespace semslam::submaps
