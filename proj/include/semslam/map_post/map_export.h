#pragma once

#include <filesystem>
#include <set>
#include <unordered_set>
#include <vector>

#include "semslam/core/pose.h"
#include "semslam/core/types.h"
#include "semslam/local_map/voxel_hash.h"

namespace semslam::map_post {

// Incremental form of AggregateMap, for sequences too large to hold in memory.
class MapAggregator {
 public:
  MapAggregator(double voxel_size, std::set<Label> exclude = {});

  void Add(const Scan& scan, const Pose3& pose);
  const std::vector<LabeledPoint>& points() const { return points_; }
  std::vector<LabeledPoint> TakePoints() { return std::move(points_); }

 private:
  double voxel_size_;
  std::set<Label> exclude_;
  std::unordered_set<Eigen::Vector3i, local_map::VoxelHash> occupied_;
  std::vector<LabeledPoint> points_;
};

// World-frame union of all scans without the excluded labels, deduplicated to
// the first point per voxel (scan order). Throws Error when the scan and pose
// counts differ.
std::vector<LabeledPoint> AggregateMap(const std::vector<Scan>& scans,
                                       const std::vector<Pose3>& poses,
                                       double voxel_size,
                                       const std::set<Label>& exclude = {});

std::vector<LabeledPoint> FilterLabels(const std::vector<LabeledPoint>& points,
                                       const std::set<Label>& exclude);

enum class PlyFormat { kAscii, kBinary };

// Vertex properties: float x, y, z; ushort label; float confidence.
void ExportPly(const std::vector<LabeledPoint>& points,
               const std::filesystem::path& path,
               PlyFormat format = PlyFormat::kAscii);

// Reads ASCII or binary little-endian PLY vertices; missing label and
// confidence properties default to unlabeled and 1.
std::vector<LabeledPoint> ReadPly(const std::filesystem::path& path);

// x,y,z,label rows with a header line.
void ExportCsv(const std::vector<LabeledPoint>& points,
               const std::filesystem::path& path);

}  // namespace semslam::map_post
