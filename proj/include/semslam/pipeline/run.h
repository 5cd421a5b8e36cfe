#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include "semslam/core/pose.h"
#include "semslam/core/types.h"
#include "semslam/io/kitti_io.h"
#include "semslam/loop_closure/pose_graph.h"
#include "semslam/pipeline/config.h"
#include "semslam/submaps/submap.h"

namespace semslam::pipeline {

enum class Mode { kOdometry, kSlam };

// "odometry" or "slam"; throws ConfigError otherwise.
Mode ParseMode(std::string_view text);

struct RunResult {
  std::vector<Pose3> trajectory;
  // Odometry poses as handed to the backend (drift included, if injected).
  std::vector<Pose3> odometry;
  std::vector<bool> degraded;
  loop_closure::PoseGraph graph;
  std::vector<std::shared_ptr<const submaps::Submap>> submaps;
  int loop_constraints = 0;
  std::int64_t first_loop_scan = -1;
};

using ScanLoader = std::function<Scan(std::size_t index)>;

RunResult RunSequence(std::size_t count, const ScanLoader& load,
                      const PipelineConfig& config, Mode mode);
RunResult RunSequence(const std::vector<Scan>& scans,
                      const PipelineConfig& config, Mode mode);

// Runs a KITTI-layout sequence and writes into out_dir:
//   poses_kitti.txt (camera frame when calib.txt exists), poses_tum.txt,
//   pose_graph.txt, map.ply (when export_map), submaps/NNNN.smap + .ppm.
// Throws Error when the velodyne directory is missing.
RunResult RunKittiSequence(const io::SequencePaths& paths,
                           const PipelineConfig& config, Mode mode,
                           const std::filesystem::path& out_dir);

// Timestamps from times.txt next to the velodyne directory, else
// index * scan_period.
std::vector<double> SequenceTimestamps(const io::SequencePaths& paths,
                                       std::size_t count, double scan_period);

}  // namespace semslam::pipeline
