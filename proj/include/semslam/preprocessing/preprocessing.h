#pragma once

#include <Eigen/Core>

#include "semslam/core/pose.h"
#include "semslam/core/types.h"

namespace semslam::preprocessing {

// Integer voxel key: floor(position / voxel_size) per axis.
Eigen::Vector3i VoxelKey(const Eigen::Vector3d& position, double voxel_size);

// Drops points whose label is in cfg.dynamic_labels; order is preserved.
Scan FilterDynamic(const Scan& scan, const SemanticConfig& cfg);

// Motion compensation under a constant-velocity model. relative_motion is the
// ego-motion over the full sweep (sweep-start frame to sweep-end frame).
// Every point is re-expressed in the sweep-end frame:
//   p' = exp((t - 1) * log(relative_motion)) * p
Scan Deskew(const Scan& scan, const Pose3& relative_motion);

// Keeps the first max_per_voxel non-critical points of each voxel (in scan
// order) plus every critical-label point. Original coordinates are kept.
// Throws ConfigError when voxel_size <= 0 or max_per_voxel < 1.
Scan AdaptiveVoxelDownsample(const Scan& scan, double voxel_size,
                             int max_per_voxel, const SemanticConfig& cfg);

// Second, coarser pass used for registration: one non-critical point per
// voxel of size alpha * voxel_size; critical-label points always survive.
Scan RegistrationDownsample(const Scan& scan, double voxel_size,
                            const SemanticConfig& cfg, double alpha = 1.5);

}  // namespace semslam::preprocessing
