#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <vector>

#include "semslam/core/pose.h"
#include "semslam/core/types.h"
#include "semslam/simgen/world.h"

namespace semslam::simgen {

struct SensorModel {
  int channels = 64;
  int azimuth_steps = 1024;
  double min_elevation = -15.0 * std::numbers::pi / 180.0;
  double max_elevation = 15.0 * std::numbers::pi / 180.0;
  double max_range = 100.0;
};

struct ScanNoise {
  double range_sigma = 0.0;
  // Probability of replacing a label; confidence becomes 1 - q.
  double label_flip = 0.0;
};

// Ray-cast sweep. pose is the sensor pose at the end of the sweep; with
// sweep_motion (the ego-motion over the sweep), the ray at time t is cast
// from pose * exp((t - 1) * sweep_motion) and reported in that frame.
Scan SimulateScan(const World& world, const Pose3& pose, const SensorModel& model,
                  const ScanNoise& noise, std::uint64_t seed,
                  const std::optional<Twist6>& sweep_motion = std::nullopt);

struct LoopTrajectory {
  std::vector<Pose3> truth;
  std::vector<Pose3> odometry;
};

// Rounded square of the given side centered on the origin, traversed
// counter-clockwise from the middle of the bottom edge; 4 * scans_per_side
// equally spaced poses at sensor_height, the last one back at the start.
// Odometry composes each true relative motion with exp(drift).
LoopTrajectory GenerateLoopTrajectory(double side, int scans_per_side,
                                      const Twist6& drift,
                                      double corner_radius = 10.0,
                                      double sensor_height = 1.73);

// Applies a constant per-step bias to a trajectory's relative motions.
std::vector<Pose3> InjectDrift(const std::vector<Pose3>& trajectory,
                               const Twist6& drift);

struct LoopPreset {
  std::uint64_t seed = 7;
  double side = 100.0;
  int scans_per_side = 100;
  double corner_radius = 10.0;
  SensorModel sensor{32, 720, -15.0 * std::numbers::pi / 180.0,
                     15.0 * std::numbers::pi / 180.0, 60.0};
  ScanNoise noise{0.01, 0.0};
  bool sweep_motion = true;
  // Simulation workers; 0 picks the hardware concurrency.
  int threads = 0;
};

struct SyntheticSequence {
  std::vector<Scan> scans;
  std::vector<Pose3> truth;
};

// Drives the loop trajectory through MakeLoopWorld. Scan k uses seed
// preset.seed + k + 1, so the result does not depend on the worker count.
SyntheticSequence MakeLoopSequence(const LoopPreset& preset);

// Writes velodyne/NNNNNN.bin, labels/NNNNNN.label, poses.txt and an
// identity calib.txt.
void WriteKittiSequence(const std::vector<Scan>& scans,
                        const std::vector<Pose3>& poses,
                        const std::filesystem::path& dir);

}  // namespace semslam::simgen
