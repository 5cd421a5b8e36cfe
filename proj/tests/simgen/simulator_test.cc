#include "semslam/simgen/simulator.h"

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "semslam/io/kitti_io.h"
#include "support/test_support.h"

namespace semslam::simgen {
namespace {

constexpr double kPi = std::numbers::pi;

SensorModel SmallSensor() { return {16, 360, -15.0 * kPi / 180.0, 15.0 * kPi / 180.0, 40.0}; }

World TestWorld() { return GenerateWorld(5, {6, 8, 3, 4, 0}, 25.0); }

LoopPreset TinyPreset() {
  LoopPreset preset;
  preset.side = 40.0;
  preset.scans_per_side = 3;
  preset.sensor = {8, 120, -15.0 * kPi / 180.0, 15.0 * kPi / 180.0, 30.0};
  return preset;
}

TEST(SimulateScan, PointsLieOnSurfaces) {
  const World world = TestWorld();
  const Pose3 pose = Pose3::FromYaw(0.4, {1.0, -2.0, 1.73});
  const SensorModel model = SmallSensor();
  const Scan scan = SimulateScan(world, pose, model, {}, 1);
  ASSERT_GT(scan.size(), 1000u);
  EXPECT_LE(scan.size(), static_cast<std::size_t>(model.channels * model.azimuth_steps));
  for (const auto& p : scan.points) {
    EXPECT_LE(p.position.norm(), model.max_range + 1e-9);
    EXPECT_LT(SurfaceDistance(world, pose * p.position), 1e-9);
    EXPECT_EQ(p.confidence, 1.0);
    EXPECT_GT(p.time_offset, 0.0);
    EXPECT_LT(p.time_offset, 1.0);
  }
}

TEST(SimulateScan, FlatGroundGeometry) {
  World world;
  world.ground_extent = 200.0;
  SensorModel model{4, 90, -20.0 * kPi / 180.0, -5.0 * kPi / 180.0, 100.0};
  const Scan scan = SimulateScan(world, Pose3::FromTranslation({0.0, 0.0, 2.0}), model, {}, 1);
  EXPECT_EQ(scan.size(), 4u * 90u);
  for (const auto& p : scan.points) {
    EXPECT_NEAR(p.position.z(), -2.0, 1e-12);
    EXPECT_EQ(p.label, kitti_labels::kRoad);
  }
  // The lowest ring lands at 2 / tan(20 deg).
  const double expected = 2.0 / std::tan(20.0 * kPi / 180.0);
  EXPECT_NEAR(scan.points[0].position.head<2>().norm(), expected, 1e-9);
}

TEST(SimulateScan, DeterministicPerSeed) {
  const World world = TestWorld();
  const Pose3 pose = Pose3::FromTranslation({0.0, 0.0, 1.73});
  const ScanNoise noise{0.02, 0.1};
  const Scan a = SimulateScan(world, pose, SmallSensor(), noise, 3);
  const Scan b = SimulateScan(world, pose, SmallSensor(), noise, 3);
  const Scan c = SimulateScan(world, pose, SmallSensor(), noise, 4);
  ASSERT_EQ(a.size(), b.size());
  ASSERT_EQ(a.size(), c.size());
  int differ = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.points[i].position, b.points[i].position);
    EXPECT_EQ(a.points[i].label, b.points[i].label);
    differ += a.points[i].position != c.points[i].position;
  }
  EXPECT_GT(differ, static_cast<int>(a.size()) / 2);
}

TEST(SimulateScan, RangeNoiseStatistics) {
  World world;
  world.ground_extent = 200.0;
  const double sigma = 0.05;
  const Pose3 pose = Pose3::FromTranslation({0.0, 0.0, 2.0});
  SensorModel model{8, 500, -25.0 * kPi / 180.0, -5.0 * kPi / 180.0, 100.0};
  const Scan clean = SimulateScan(world, pose, model, {}, 1);
  const Scan noisy = SimulateScan(world, pose, model, {sigma, 0.0}, 1);
  ASSERT_EQ(clean.size(), noisy.size());
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const double d = noisy.points[i].position.norm() - clean.points[i].position.norm();
    sum += d;
    sum2 += d * d;
  }
  const double n = static_cast<double>(clean.size());
  EXPECT_NEAR(sum / n, 0.0, 4.0 * sigma / std::sqrt(n));
  EXPECT_NEAR(std::sqrt(sum2 / n), sigma, 0.1 * sigma);
}

TEST(SimulateScan, LabelFlipRateAndConfidence) {
  World world;
  world.ground_extent = 200.0;
  const double q = 0.2;
  SensorModel model{8, 1000, -25.0 * kPi / 180.0, -5.0 * kPi / 180.0, 100.0};
  const Scan scan =
      SimulateScan(world, Pose3::FromTranslation({0.0, 0.0, 2.0}), model, {0.0, q}, 2);
  int flipped = 0;
  for (const auto& p : scan.points) {
    EXPECT_DOUBLE_EQ(p.confidence, 1.0 - q);
    flipped += p.label != kitti_labels::kRoad;
  }
  const double rate = static_cast<double>(flipped) / scan.size();
  EXPECT_NEAR(rate, q, 0.02);
}

TEST(SimulateScan, SweepMotionFramesPerPoint) {
  const World world = TestWorld();
  const Pose3 pose = Pose3::FromYaw(-0.3, {2.0, 1.0, 1.73});
  Twist6 motion;
  motion.translation = {1.2, 0.1, 0.0};
  motion.rotation = {0.0, 0.0, 0.05};
  const Scan scan = SimulateScan(world, pose, SmallSensor(), {}, 1, motion);
  ASSERT_GT(scan.size(), 1000u);
  int off_static = 0;
  for (const auto& p : scan.points) {
    const Pose3 at_time = pose * Se3Exp(motion * (p.time_offset - 1.0));
    EXPECT_LT(SurfaceDistance(world, at_time * p.position), 1e-9);
    off_static += SurfaceDistance(world, pose * p.position) > 0.05;
  }
  EXPECT_GT(off_static, static_cast<int>(scan.size()) / 4);
}

TEST(SimulateScan, RejectsEmptySensor) {
  SensorModel model;
  model.channels = 0;
  EXPECT_THROW(SimulateScan(TestWorld(), Pose3(), model, {}, 1), ConfigError);
}

TEST(LoopTrajectory, ClosesWithEqualSpacing) {
  const auto loop = GenerateLoopTrajectory(100.0, 25, Twist6{}, 10.0, 1.73);
  ASSERT_EQ(loop.truth.size(), 100u);
  EXPECT_LT(testing::TranslationError(loop.truth.front(), loop.truth.back()), 1e-9);
  EXPECT_LT(testing::RotationErrorDeg(loop.truth.front(), loop.truth.back()), 1e-6);
  EXPECT_TRUE(loop.truth.front().translation().isApprox(Eigen::Vector3d(0.0, -50.0, 1.73)));
  const double perimeter = 4.0 * (80.0 + 0.5 * kPi * 10.0);
  const double arc_step = perimeter / 99.0;
  for (std::size_t k = 1; k < loop.truth.size(); ++k) {
    const Eigen::Vector3d d = loop.truth[k].translation() - loop.truth[k - 1].translation();
    EXPECT_NEAR(d.z(), 0.0, 1e-12);
    EXPECT_LE(d.norm(), arc_step + 1e-9);
    EXPECT_GT(d.norm(), 0.97 * arc_step);
    // The chord direction lies between the two headings.
    const double travel = std::atan2(d.y(), d.x());
    const double turn =
        std::remainder(loop.truth[k].Yaw() - loop.truth[k - 1].Yaw(), 2.0 * kPi);
    const double mid = loop.truth[k - 1].Yaw() + 0.5 * turn;
    EXPECT_LE(std::abs(std::remainder(travel - mid, 2.0 * kPi)), 0.5 * std::abs(turn) + 1e-9);
  }
  for (std::size_t k = 0; k < loop.truth.size(); ++k) {
    EXPECT_LT(testing::TranslationError(loop.odometry[k], loop.truth[k]), 1e-12);
  }
  EXPECT_THROW(GenerateLoopTrajectory(0.0, 10, Twist6{}), ConfigError);
}

TEST(InjectDrift, RelativeMotionsCarryBias) {
  std::mt19937_64 rng(3);
  std::vector<Pose3> truth = {testing::RandomPose(rng, 1.0, 5.0)};
  for (int k = 0; k < 30; ++k) truth.push_back(truth.back() * testing::RandomPose(rng, 0.1, 1.0));
  const Twist6 drift = testing::RandomTwist(rng, 0.01, 0.02);
  const auto drifted = InjectDrift(truth, drift);
  ASSERT_EQ(drifted.size(), truth.size());
  EXPECT_EQ(drifted[0].Matrix(), truth[0].Matrix());
  for (std::size_t k = 1; k < truth.size(); ++k) {
    const Pose3 expected = truth[k - 1].inverse() * truth[k] * Se3Exp(drift);
    const Pose3 actual = drifted[k - 1].inverse() * drifted[k];
    EXPECT_LT((expected.Matrix() - actual.Matrix()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(InjectDrift, YawDriftAccumulatesLinearly) {
  const auto line = GenerateLoopTrajectory(100.0, 25, Twist6{}).truth;
  Twist6 drift;
  drift.rotation = {0.0, 0.0, 0.001};
  const auto drifted = InjectDrift(line, drift);
  const double residual = std::remainder(
      (drifted.back().Yaw() - drifted.front().Yaw()) -
          (line.back().Yaw() - line.front().Yaw()),
      2.0 * kPi);
  EXPECT_NEAR(residual, 0.001 * (line.size() - 1), 1e-9);
}

TEST(WriteKittiSequence, LayoutAndRoundTrip) {
  const World world = TestWorld();
  std::vector<Scan> scans;
  std::vector<Pose3> poses;
  for (int k = 0; k < 3; ++k) {
    poses.push_back(Pose3::FromYaw(0.1 * k, {1.0 * k, 0.0, 1.73}));
    scans.push_back(SimulateScan(world, poses.back(), SmallSensor(), {}, k));
  }
  testing::TempDir dir;
  WriteKittiSequence(scans, poses, dir.path());
  for (const char* name : {"velodyne/000000.bin", "velodyne/000002.bin",
                           "labels/000001.label", "poses.txt", "calib.txt"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
  }
  EXPECT_FALSE(std::filesystem::exists(dir / "velodyne/000003.bin"));
  EXPECT_TRUE(io::ReadVeloToCamera(dir / "calib.txt").Matrix().isIdentity(1e-12));
  const auto read_poses = io::ReadPosesKitti(dir / "poses.txt");
  ASSERT_EQ(read_poses.size(), 3u);
  EXPECT_LT(testing::TranslationError(read_poses[2], poses[2]), 1e-6);
  const Scan back = io::ReadScan(dir / "velodyne/000001.bin", dir / "labels/000001.label");
  ASSERT_EQ(back.size(), scans[1].size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_LT((back.points[i].position - scans[1].points[i].position).norm(), 1e-4);
    EXPECT_EQ(back.points[i].label, scans[1].points[i].label);
  }
  EXPECT_THROW(WriteKittiSequence(scans, {poses[0]}, dir / "bad"), Error);
}

TEST(MakeLoopSequence, DeterministicAcrossWorkerCounts) {
  LoopPreset preset = TinyPreset();
  preset.threads = 1;
  const auto a = MakeLoopSequence(preset);
  preset.threads = 3;
  const auto b = MakeLoopSequence(preset);
  ASSERT_EQ(a.scans.size(), 12u);
  ASSERT_EQ(b.scans.size(), 12u);
  for (std::size_t k = 0; k < a.scans.size(); ++k) {
    EXPECT_EQ(a.scans[k].index, static_cast<std::int64_t>(k));
    ASSERT_EQ(a.scans[k].size(), b.scans[k].size());
    EXPECT_GT(a.scans[k].size(), 100u);
    for (std::size_t i = 0; i < a.scans[k].size(); ++i) {
      ASSERT_EQ(a.scans[k].points[i].position, b.scans[k].points[i].position);
    }
    EXPECT_EQ(a.truth[k].Matrix(), b.truth[k].Matrix());
  }
  std::set<Label> labels;
  for (const auto& scan : a.scans) {
    for (const auto& p : scan.points) labels.insert(p.label);
  }
  EXPECT_TRUE(labels.contains(kitti_labels::kRoad));
  EXPECT_TRUE(labels.contains(kitti_labels::kBuilding));
}

}  // namespace
}  // namespace semslam::simgen
