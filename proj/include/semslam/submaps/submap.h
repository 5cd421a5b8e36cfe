#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>

#include "semslam/core/pose.h"
#include "semslam/core/types.h"
#include "semslam/submaps/semantic_grid.h"

namespace semslam::submaps {

struct SubmapOptions {
  double resolution = 0.1;
  // Height band relative to the sensor; points outside stay out of the grid.
  double min_height = -3.0;
  double max_height = 1.0;
  // Horizontal range limit for grid insertion.
  double max_range = 30.0;
};

// Projects a sensor-frame point into the 2D frame of local_pose (which is
// expected to be gravity aligned). Returns false when the point falls
// outside the height band or range limit.
bool ProjectToGridPlane(const Eigen::Vector3d& sensor_point,
                        const Pose3& sensor_pose, const Pose3& local_pose,
                        const SubmapOptions& options, Eigen::Vector2d* out);

class Submap {
 public:
  Submap(const Pose3& local_pose, const SubmapOptions& options = {});

  // Ray-casts every point (ground included) from the sensor origin. Throws
  // Error if the submap is finished.
  void InsertScan(const Scan& scan, const Pose3& pose);

  // Idempotent.
  void Finalize() { finished_ = true; }

  bool finished() const { return finished_; }
  const SemanticGrid& grid() const { return grid_; }
  const Pose3& local_pose() const { return grid_.local_pose(); }
  const SubmapOptions& options() const { return options_; }
  // Inclusive; (-1, -1) before the first insertion.
  std::pair<std::int64_t, std::int64_t> scan_range() const {
    return scan_range_;
  }
  int num_scans() const { return num_scans_; }

  static Submap FromParts(SemanticGrid grid, const SubmapOptions& options,
                          std::pair<std::int64_t, std::int64_t> scan_range,
                          int num_scans, bool finished);

 private:
  Submap(SemanticGrid grid, const SubmapOptions& options);

  SubmapOptions options_;
  SemanticGrid grid_;
  std::pair<std::int64_t, std::int64_t> scan_range_{-1, -1};
  int num_scans_ = 0;
  bool finished_ = false;
};

// Versioned binary blob: header (resolution, origin index, dims, local pose,
// scan range) followed by run-length encoded cells.
void WriteSubmap(const Submap& submap, const std::filesystem::path& path);
Submap ReadSubmap(const std::filesystem::path& path);
std::string SerializeSubmap(const Submap& submap);
Submap DeserializeSubmap(const std::string& blob);

// Debug image of dominant labels (binary PPM), occupied cells colored by
// label, free cells white, unknown cells grey.
void WriteDominantLabelImage(const SemanticGrid& grid,
                             const std::filesystem::path& path);

}  // namespace semslam::submaps
