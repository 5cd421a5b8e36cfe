#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "semslam/core/pose.h"
#include "semslam/core/types.h"

namespace semslam::submaps {

struct LabelCount {
  Label label;
  std::uint32_t count;
};

// Per-label hit counts plus a label-agnostic miss count. Hits are stored
// sparsely, sorted by label.
struct GridCell {
  std::vector<LabelCount> hits;
  std::uint32_t misses = 0;

  std::uint32_t TotalHits() const;
  std::uint32_t HitsFor(Label label) const;
  void AddHit(Label label, std::uint32_t count = 1);
  bool empty() const { return hits.empty() && misses == 0; }
};

struct DominantLabel {
  Label label = kUnlabeled;
  double hit_fraction = 0.0;
};

// argmax of the per-label hits (ties go to the smaller id) and its share of
// all observations hits[label] / (total_hits + misses).
DominantLabel DominantLabelOf(const GridCell& cell);

// hits[label] / (total_hits + misses); 0 for an empty cell.
double HitFraction(const GridCell& cell, Label label);

// Dense 2D grid of GridCells that grows on demand. Cell (i, j) covers
// [i, i+1) x [j, j+1) times the resolution in the grid frame; the dense array
// spans [min_index, min_index + size).
class SemanticGrid {
 public:
  explicit SemanticGrid(double resolution = 0.1,
                        const Pose3& local_pose = Pose3::Identity());

  double resolution() const { return resolution_; }
  const Pose3& local_pose() const { return local_pose_; }
  const Eigen::Vector2i& min_index() const { return min_index_; }
  const Eigen::Vector2i& size() const { return size_; }
  Eigen::Vector2d origin() const { return min_index_.cast<double>() * resolution_; }

  Eigen::Vector2i CellIndex(const Eigen::Vector2d& point) const;
  Eigen::Vector2d CellCenter(const Eigen::Vector2i& index) const;
  bool Contains(const Eigen::Vector2i& index) const;

  // nullptr outside the allocated area.
  const GridCell* Cell(const Eigen::Vector2i& index) const;
  GridCell& MutableCell(const Eigen::Vector2i& index);

  // Grows the dense array so that [lo, hi] is covered.
  void EnsureContains(const Eigen::Vector2i& lo, const Eigen::Vector2i& hi);

  // Endpoint cell gets one hit for label; every other cell on the Bresenham
  // line from the origin cell gets one miss.
  void InsertRay(const Eigen::Vector2d& origin, const Eigen::Vector2d& endpoint,
                 Label label);

  std::uint64_t TotalHits() const;
  std::size_t OccupiedCells() const;

  // Raw access for serialization and pyramid construction (row-major, x
  // fastest).
  const std::vector<GridCell>& cells() const { return cells_; }
  static SemanticGrid FromParts(double resolution, const Pose3& local_pose,
                                const Eigen::Vector2i& min_index,
                                const Eigen::Vector2i& size,
                                std::vector<GridCell> cells);

 private:
  std::size_t Offset(const Eigen::Vector2i& index) const {
    const Eigen::Vector2i rel = index - min_index_;
    return static_cast<std::size_t>(rel.y()) * size_.x() + rel.x();
  }

  double resolution_;
  Pose3 local_pose_;
  Eigen::Vector2i min_index_ = Eigen::Vector2i::Zero();
  Eigen::Vector2i size_ = Eigen::Vector2i::Zero();
  std::vector<GridCell> cells_;
};

// Cells visited by the integer Bresenham line from a to b, both included.
std::vector<Eigen::Vector2i> BresenhamLine(const Eigen::Vector2i& a,
                                           const Eigen::Vector2i& b);

}  // namespace semslam::submaps
