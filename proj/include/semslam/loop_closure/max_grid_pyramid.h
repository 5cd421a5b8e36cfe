#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "semslam/core/types.h"
#include "semslam/submaps/semantic_grid.h"

namespace semslam::loop_closure {

// Per-label max-pooled hit fractions. Level 0 holds the exact hit fraction of
// every occupied cell; level h holds, at index c, an upper bound of the level 0
// values over the window [c, c + 2^h) in both axes. Levels above 0 are stored
// as bytes rounded upwards, so they stay admissible.
//
// Unlabeled queries read a dedicated layer holding each cell's dominant label
// fraction.
class MaxGridPyramid {
 public:
  static constexpr int kNoLayer = -1;

  MaxGridPyramid() = default;
  MaxGridPyramid(const submaps::SemanticGrid& grid, int depth);

  int depth() const { return depth_; }
  double resolution() const { return resolution_; }
  int num_layers() const { return static_cast<int>(layer_labels_.size()) + 1; }

  // kNoLayer when the label never occurs in the grid.
  int LayerOf(Label label) const;

  // Exact level 0 value, 0 outside the occupied area.
  double BaseValue(int layer, const Eigen::Vector2i& index) const {
    if (layer < 0) return 0.0;
    const Eigen::Vector2i rel = index - base_min_;
    if (rel.x() < 0 || rel.y() < 0 || rel.x() >= base_size_.x() ||
        rel.y() >= base_size_.y()) {
      return 0.0;
    }
    return base_[LayerOffset(layer, base_size_) +
                 static_cast<std::size_t>(rel.y()) * base_size_.x() + rel.x()];
  }

  // Quantized bound in 1/255 units at level >= 1.
  int QuantizedBound(int level, int layer, const Eigen::Vector2i& index) const {
    if (layer < 0 || levels_.empty()) return 0;
    const Level& l = levels_[level - 1];
    const Eigen::Vector2i rel = index - l.min;
    if (rel.x() < 0 || rel.y() < 0 || rel.x() >= l.size.x() ||
        rel.y() >= l.size.y()) {
      return 0;
    }
    return l.values[LayerOffset(layer, l.size) +
                    static_cast<std::size_t>(rel.y()) * l.size.x() + rel.x()];
  }

  // Level 0 is exact, higher levels are the dequantized bound.
  double Value(int level, Label label, const Eigen::Vector2i& index) const;

  std::size_t MemoryBytes() const;

 private:
  struct Level {
    Eigen::Vector2i min = Eigen::Vector2i::Zero();
    Eigen::Vector2i size = Eigen::Vector2i::Zero();
    std::vector<std::uint8_t> values;
  };

  static std::size_t LayerOffset(int layer, const Eigen::Vector2i& size) {
    return static_cast<std::size_t>(layer) * size.x() * size.y();
  }

  int depth_ = 0;
  double resolution_ = 0.1;
  std::vector<Label> layer_labels_;  // sorted, excludes the dominant layer
  Eigen::Vector2i base_min_ = Eigen::Vector2i::Zero();
  Eigen::Vector2i base_size_ = Eigen::Vector2i::Zero();
  std::vector<double> base_;
  std::vector<Level> levels_;  // levels_[h - 1] is level h
};

// Smallest q with q / 255 >= value, value in [0, 1].
int QuantizeUp(double value);

MaxGridPyramid PrecomputeMaxGrids(const submaps::SemanticGrid& grid, int depth);

}  // namespace semslam::loop_closure
