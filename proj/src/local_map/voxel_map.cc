#include "semslam/local_map/voxel_map.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace semslam::local_map {
namespace {

constexpr double kDuplicateDistance = 1e-6;

}  // namespace

SemanticVoxelMap::SemanticVoxelMap(double voxel_size, int max_points_per_voxel,
                                   double max_range, SemanticConfig cfg)
    : voxel_size_(voxel_size),
      max_points_per_voxel_(max_points_per_voxel),
      max_range_(max_range),
      cfg_(std::move(cfg)) {
  if (!(voxel_size_ > 0.0)) throw ConfigError("voxel_size must be positive");
  if (max_points_per_voxel_ < 1) {
    throw ConfigError("max_points_per_voxel must be at least 1");
  }
  if (!(max_range_ > 0.0)) throw ConfigError("max_range must be positive");
}

Eigen::Vector3i SemanticVoxelMap::KeyOf(const Eigen::Vector3d& position) const {
  return (position / voxel_size_).array().floor().cast<int>();
}

Eigen::Vector3d SemanticVoxelMap::CellCenter(const Eigen::Vector3i& key) const {
  return (key.cast<double>().array() + 0.5) * voxel_size_;
}

void SemanticVoxelMap::InsertScan(const Scan& scan, const Pose3& pose) {
  for (const auto& point : scan.points) {
    LabeledPoint world = point;
    world.position = pose * point.position;
    InsertPoint(world);
  }
}

void SemanticVoxelMap::InsertPoint(const LabeledPoint& world_point) {
  auto& cell = cells_[KeyOf(world_point.position)];
  int non_critical = 0;
  for (const auto& stored : cell) {
    if ((stored.position - world_point.position).norm() < kDuplicateDistance) {
      return;
    }
    if (!cfg_.IsCritical(stored.label)) ++non_critical;
  }
  if (!cfg_.IsCritical(world_point.label) &&
      non_critical >= max_points_per_voxel_) {
    return;
  }
  cell.push_back(world_point);
  ++num_points_;
}

std::optional<Neighbor> SemanticVoxelMap::NearestNeighbor(
    const Eigen::Vector3d& query, double max_dist) const {
  if (cells_.empty() || !(max_dist > 0.0)) return std::nullopt;

  const Eigen::Vector3i center = KeyOf(query);
  const int max_shell = static_cast<int>(std::ceil(max_dist / voxel_size_)) + 1;

  const LabeledPoint* best = nullptr;
  double best_dist = max_dist;

  auto visit_cell = [&](const Eigen::Vector3i& key) {
    const auto it = cells_.find(key);
    if (it == cells_.end()) return;
    for (const auto& candidate : it->second) {
      const double d = (candidate.position - query).norm();
      if (d < best_dist) {
        best_dist = d;
        best = &candidate;
      }
    }
  };

  for (int k = 0; k <= max_shell; ++k) {
    if (k > 0) {
      // Distance from the query to the outside of the already searched cube
      // of shells [0, k-1]; nothing beyond it can beat best_dist.
      double gap = std::numeric_limits<double>::infinity();
      for (int axis = 0; axis < 3; ++axis) {
        const double lo = (center[axis] - (k - 1)) * voxel_size_;
        const double hi = (center[axis] + k) * voxel_size_;
        gap = std::min({gap, query[axis] - lo, hi - query[axis]});
      }
      gap -= 1e-9 * voxel_size_;
      if (gap >= best_dist) break;
    }
    for (int dx = -k; dx <= k; ++dx) {
      for (int dy = -k; dy <= k; ++dy) {
        const bool on_face = std::abs(dx) == k || std::abs(dy) == k;
        if (on_face) {
          for (int dz = -k; dz <= k; ++dz) {
            visit_cell(center + Eigen::Vector3i(dx, dy, dz));
          }
        } else {
          visit_cell(center + Eigen::Vector3i(dx, dy, -k));
          if (k != 0) visit_cell(center + Eigen::Vector3i(dx, dy, k));
        }
      }
    }
  }
  if (best == nullptr) return std::nullopt;
  return Neighbor{*best, best_dist};
}

void SemanticVoxelMap::PruneFar(const Eigen::Vector3d& center) {
  const double max_range_sq = max_range_ * max_range_;
  for (auto it = cells_.begin(); it != cells_.end();) {
    if ((CellCenter(it->first) - center).squaredNorm() > max_range_sq) {
      num_points_ -= it->second.size();
      it = cells_.erase(it);
    } else {
      ++it;
    }
  }
}

std::vector<LabeledPoint> SemanticVoxelMap::Points() const {
  std::vector<LabeledPoint> points;
  points.reserve(num_points_);
  for (const auto& [key, cell] : cells_) {
    points.insert(points.end(), cell.begin(), cell.end());
  }
  return points;
}

}  // namespace semslam::local_map
