#include "semslam/loop_closure/max_grid_pyramid.h"

#include <algorithm>
#include <cmath>

namespace semslam::loop_closure {

int QuantizeUp(double value) {
  if (!(value > 0.0)) return 0;
  if (value >= 1.0) return 255;
  int q = static_cast<int>(std::ceil(value * 255.0));
  while (q < 255 && q / 255.0 < value) ++q;
  return std::min(q, 255);
}

MaxGridPyramid::MaxGridPyramid(const submaps::SemanticGrid& grid, int depth)
    : depth_(depth), resolution_(grid.resolution()) {
  if (depth < 0) throw ConfigError("pyramid depth must be non-negative");

  // Occupied bounding box and label set.
  Eigen::Vector2i lo(0, 0), hi(-1, -1);
  bool any = false;
  const auto& cells = grid.cells();
  const int w = grid.size().x();
  for (int y = 0; y < grid.size().y(); ++y) {
    for (int x = 0; x < w; ++x) {
      const auto& cell = cells[static_cast<std::size_t>(y) * w + x];
      if (cell.hits.empty()) continue;
      const Eigen::Vector2i index = grid.min_index() + Eigen::Vector2i(x, y);
      if (!any) {
        lo = hi = index;
        any = true;
      } else {
        lo = lo.cwiseMin(index);
        hi = hi.cwiseMax(index);
      }
      for (const auto& h : cell.hits) layer_labels_.push_back(h.label);
    }
  }
  std::sort(layer_labels_.begin(), layer_labels_.end());
  layer_labels_.erase(std::unique(layer_labels_.begin(), layer_labels_.end()),
                      layer_labels_.end());
  // Unlabeled hits are looked up through the dominant layer instead.
  if (!layer_labels_.empty() && layer_labels_.front() == kUnlabeled) {
    layer_labels_.erase(layer_labels_.begin());
  }

  base_min_ = lo;
  base_size_ = any ? Eigen::Vector2i(hi - lo + Eigen::Vector2i::Ones())
                   : Eigen::Vector2i::Zero();
  const int layers = num_layers();
  const int dominant = layers - 1;
  base_.assign(static_cast<std::size_t>(layers) * base_size_.x() * base_size_.y(),
               0.0);
  for (int y = 0; y < base_size_.y(); ++y) {
    for (int x = 0; x < base_size_.x(); ++x) {
      const auto* cell = grid.Cell(base_min_ + Eigen::Vector2i(x, y));
      if (cell == nullptr || cell->hits.empty()) continue;
      const std::size_t offset = static_cast<std::size_t>(y) * base_size_.x() + x;
      for (const auto& h : cell->hits) {
        const int layer = LayerOf(h.label);
        if (layer == dominant) continue;
        base_[LayerOffset(layer, base_size_) + offset] =
            submaps::HitFraction(*cell, h.label);
      }
      base_[LayerOffset(dominant, base_size_) + offset] =
          submaps::DominantLabelOf(*cell).hit_fraction;
    }
  }

  // Level h from level h-1: max of the four windows of half the size.
  levels_.resize(any ? depth : 0);
  for (int h = 1; h <= static_cast<int>(levels_.size()); ++h) {
    const int s = 1 << (h - 1);
    Level& level = levels_[h - 1];
    level.min = base_min_ - Eigen::Vector2i::Constant((1 << h) - 1);
    level.size = base_size_ + Eigen::Vector2i::Constant((1 << h) - 1);
    level.values.assign(
        static_cast<std::size_t>(layers) * level.size.x() * level.size.y(), 0);
    for (int layer = 0; layer < layers; ++layer) {
      const std::size_t lo_off = LayerOffset(layer, level.size);
      for (int y = 0; y < level.size.y(); ++y) {
        for (int x = 0; x < level.size.x(); ++x) {
          const Eigen::Vector2i c = level.min + Eigen::Vector2i(x, y);
          int q = 0;
          for (const Eigen::Vector2i& d :
               {Eigen::Vector2i(0, 0), Eigen::Vector2i(s, 0),
                Eigen::Vector2i(0, s), Eigen::Vector2i(s, s)}) {
            const int v = h == 1 ? QuantizeUp(BaseValue(layer, c + d))
                                 : QuantizedBound(h - 1, layer, c + d);
            q = std::max(q, v);
          }
          level.values[lo_off + static_cast<std::size_t>(y) * level.size.x() + x] =
              static_cast<std::uint8_t>(q);
        }
      }
    }
  }
}

int MaxGridPyramid::LayerOf(Label label) const {
  if (label == kUnlabeled) return num_layers() - 1;
  const auto it =
      std::lower_bound(layer_labels_.begin(), layer_labels_.end(), label);
  if (it == layer_labels_.end() || *it != label) return kNoLayer;
  return static_cast<int>(it - layer_labels_.begin());
}

double MaxGridPyramid::Value(int level, Label label,
                             const Eigen::Vector2i& index) const {
  const int layer = LayerOf(label);
  if (level == 0) return BaseValue(layer, index);
  if (level > depth()) throw Error("pyramid level out of range");
  return QuantizedBound(level, layer, index) / 255.0;
}

std::size_t MaxGridPyramid::MemoryBytes() const {
  std::size_t bytes = base_.size() * sizeof(double);
  for (const auto& l : levels_) bytes += l.values.size();
  return bytes;
}

MaxGridPyramid PrecomputeMaxGrids(const submaps::SemanticGrid& grid, int depth) {
  return MaxGridPyramid(grid, depth);
}

}  // namespace semslam::loop_closure
