#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "semslam/core/pose.h"
#include "semslam/core/types.h"
#include "semslam/local_map/voxel_hash.h"

namespace semslam::local_map {

struct Neighbor {
  LabeledPoint point;
  double distance = 0.0;
};

// Hash grid of labeled world-frame points; the ICP target.
//
// Each cell keeps at most max_points_per_voxel non-critical points. Points
// with a critical label are always accepted, mirroring the downsampler.
class SemanticVoxelMap {
 public:
  SemanticVoxelMap(double voxel_size, int max_points_per_voxel,
                   double max_range, SemanticConfig cfg = {});

  double voxel_size() const { return voxel_size_; }
  int max_points_per_voxel() const { return max_points_per_voxel_; }
  double max_range() const { return max_range_; }

  // Transforms the scan to world frame and inserts it. Points closer than
  // 1e-6 to a stored point of the same cell are skipped.
  void InsertScan(const Scan& scan, const Pose3& pose);
  void InsertPoint(const LabeledPoint& world_point);

  // Exact nearest stored point with distance < max_dist.
  std::optional<Neighbor> NearestNeighbor(const Eigen::Vector3d& query,
                                          double max_dist) const;

  // Removes every cell whose center is farther than max_range from center.
  void PruneFar(const Eigen::Vector3d& center);

  bool empty() const { return cells_.empty(); }
  std::size_t size() const { return num_points_; }
  std::size_t cell_count() const { return cells_.size(); }
  std::vector<LabeledPoint> Points() const;

  Eigen::Vector3i KeyOf(const Eigen::Vector3d& position) const;
  Eigen::Vector3d CellCenter(const Eigen::Vector3i& key) const;
  const std::unordered_map<Eigen::Vector3i, std::vector<LabeledPoint>,
                           VoxelHash>&
  cells() const {
    return cells_;
  }

 private:
  double voxel_size_;
  int max_points_per_voxel_;
  double max_range_;
  SemanticConfig cfg_;
  std::size_t num_points_ = 0;
  std::unordered_map<Eigen::Vector3i, std::vector<LabeledPoint>, VoxelHash>
      cells_;
};

}  // namespace semslam::local_map
