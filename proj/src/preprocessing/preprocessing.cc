#include "semslam/preprocessing/preprocessing.h"

#include <cmath>
#include <string>
#include <unordered_map>

#include "semslam/local_map/voxel_hash.h"

namespace semslam::preprocessing {

Eigen::Vector3i VoxelKey(const Eigen::Vector3d& position, double voxel_size) {
  return (position / voxel_size).array().floor().cast<int>();
}

Scan FilterDynamic(const Scan& scan, const SemanticConfig& cfg) {
  Scan out;
  out.index = scan.index;
  out.duration = scan.duration;
  out.points.reserve(scan.points.size());
  for (const auto& point : scan.points) {
    if (!cfg.IsDynamic(point.label)) out.points.push_back(point);
  }
  return out;
}

Scan Deskew(const Scan& scan, const Pose3& relative_motion) {
  const Twist6 xi = Se3Log(relative_motion);
  Scan out = scan;
  for (auto& point : out.points) {
    point.position = Se3Exp(xi * (point.time_offset - 1.0)) * point.position;
  }
  return out;
}

Scan AdaptiveVoxelDownsample(const Scan& scan, double voxel_size,
                             int max_per_voxel, const SemanticConfig& cfg) {
  if (!(voxel_size > 0.0)) {
    throw ConfigError("voxel_size must be positive, got " +
                      std::to_string(voxel_size));
  }
  if (max_per_voxel < 1) {
    throw ConfigError("max_points_per_voxel must be at least 1");
  }
  std::unordered_map<Eigen::Vector3i, int, local_map::VoxelHash> counts;
  counts.reserve(scan.points.size());
  Scan out;
  out.index = scan.index;
  out.duration = scan.duration;
  for (const auto& point : scan.points) {
    if (cfg.IsCritical(point.label)) {
      out.points.push_back(point);
      continue;
    }
    int& count = counts[VoxelKey(point.position, voxel_size)];
    if (count < max_per_voxel) {
      ++count;
      out.points.push_back(point);
    }
  }
  return out;
}

Scan RegistrationDownsample(const Scan& scan, double voxel_size,
                            const SemanticConfig& cfg, double alpha) {
  return AdaptiveVoxelDownsample(scan, alpha * voxel_size, 1, cfg);
}

}  // namespace semslam::preprocessing
