#include "semslam/pipeline/odometry.h"

#include "semslam/preprocessing/preprocessing.h"

namespace semslam::pipeline {

Odometry::Odometry(const PipelineConfig& config)
    : config_(config),
      map_(config.voxel_size, config.max_points_per_voxel, config.max_range,
           config.semantic),
      threshold_(config.initial_threshold, config.min_motion, config.max_range) {
  config_.Validate();
}

OdometryResult Odometry::ProcessScan(const Scan& scan) {
  const Pose3 relative = poses_.size() >= 2
                             ? poses_[poses_.size() - 2].inverse() * poses_.back()
                             : Pose3::Identity();
  const Pose3 predicted =
      poses_.empty() ? Pose3::Identity()
                     : poses_.back() * registration::PredictMotion(relative);

  OdometryResult result;
  const Scan filtered = preprocessing::FilterDynamic(scan, config_.semantic);
  if (filtered.empty()) {
    result.pose = predicted;
    result.degraded = true;
    result.frame.index = scan.index;
    result.registration_points.index = scan.index;
    poses_.push_back(predicted);
    return result;
  }

  const Scan deskewed =
      config_.deskew ? preprocessing::Deskew(filtered, relative) : filtered;
  result.frame = preprocessing::AdaptiveVoxelDownsample(
      deskewed, config_.voxel_size, config_.max_points_per_voxel, config_.semantic);
  result.registration_points = preprocessing::RegistrationDownsample(
      result.frame, config_.voxel_size, config_.semantic,
      config_.registration_voxel_factor);

  if (map_.empty()) {
    result.pose = predicted;
  } else {
    const auto reg = registration::RegisterScan(
        result.registration_points, map_, predicted, threshold_.Threshold(),
        config_.semantic, config_.registration);
    result.pose = reg.pose;
    result.iterations = reg.iterations;
    threshold_.Update(predicted, result.pose);
  }

  map_.InsertScan(result.frame, result.pose);
  map_.PruneFar(result.pose.translation());
  poses_.push_back(result.pose);
  return result;
}

}  // namespace semslam::pipeline
