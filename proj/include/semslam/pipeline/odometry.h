#pragma once

#include <vector>

#include "semslam/core/pose.h"
#include "semslam/core/types.h"
#include "semslam/local_map/voxel_map.h"
#include "semslam/pipeline/config.h"
#include "semslam/registration/registration.h"

namespace semslam::pipeline {

struct OdometryResult {
  Pose3 pose;
  // Nothing survived filtering; pose is the constant-velocity prediction.
  bool degraded = false;
  int iterations = 0;
  // Deskewed, voxel-downsampled frame (sensor frame) and its coarser
  // registration subset.
  Scan frame;
  Scan registration_points;
};

class Odometry {
 public:
  explicit Odometry(const PipelineConfig& config);

  // Scans must arrive in index order.
  OdometryResult ProcessScan(const Scan& scan);

  const std::vector<Pose3>& poses() const { return poses_; }
  const local_map::SemanticVoxelMap& local_map() const { return map_; }
  double threshold() const { return threshold_.Threshold(); }

 private:
  PipelineConfig config_;
  local_map::SemanticVoxelMap map_;
  registration::AdaptiveThreshold threshold_;
  std::vector<Pose3> poses_;
};

}  // namespace semslam::pipeline
