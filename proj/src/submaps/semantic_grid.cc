#include "semslam/submaps/semantic_grid.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace semslam::submaps {
namespace {

constexpr int kGrowthMargin = 32;

}  // namespace

std::uint32_t GridCell::TotalHits() const {
  std::uint32_t total = 0;
  for (const auto& h : hits) total += h.count;
  return total;
}

std::uint32_t GridCell::HitsFor(Label label) const {
  for (const auto& h : hits) {
    if (h.label == label) return h.count;
  }
  return 0;
}

void GridCell::AddHit(Label label, std::uint32_t count) {
  auto it = std::lower_bound(
      hits.begin(), hits.end(), label,
      [](const LabelCount& h, Label l) { return h.label < l; });
  if (it != hits.end() && it->label == label) {
    it->count += count;
  } else {
    hits.insert(it, LabelCount{label, count});
  }
}

DominantLabel DominantLabelOf(const GridCell& cell) {
  DominantLabel best;
  std::uint32_t best_count = 0;
  std::uint32_t total = 0;
  for (const auto& h : cell.hits) {
    total += h.count;
    // Hits are sorted by label, so strict > keeps the smaller id on ties.
    if (h.count > best_count) {
      best_count = h.count;
      best.label = h.label;
    }
  }
  if (best_count == 0) return {};
  best.hit_fraction =
      static_cast<double>(best_count) / static_cast<double>(total + cell.misses);
  return best;
}

double HitFraction(const GridCell& cell, Label label) {
  const std::uint32_t denom = cell.TotalHits() + cell.misses;
  if (denom == 0) return 0.0;
  return static_cast<double>(cell.HitsFor(label)) / static_cast<double>(denom);
}

SemanticGrid::SemanticGrid(double resolution, const Pose3& local_pose)
    : resolution_(resolution), local_pose_(local_pose) {
  if (!(resolution_ > 0.0)) throw ConfigError("grid resolution must be positive");
}

Eigen::Vector2i SemanticGrid::CellIndex(const Eigen::Vector2d& point) const {
  return (point / resolution_).array().floor().cast<int>();
}

Eigen::Vector2d SemanticGrid::CellCenter(const Eigen::Vector2i& index) const {
  return (index.cast<double>().array() + 0.5) * resolution_;
}

bool SemanticGrid::Contains(const Eigen::Vector2i& index) const {
  const Eigen::Vector2i rel = index - min_index_;
  return rel.x() >= 0 && rel.y() >= 0 && rel.x() < size_.x() &&
         rel.y() < size_.y();
}

const GridCell* SemanticGrid::Cell(const Eigen::Vector2i& index) const {
  if (!Contains(index)) return nullptr;
  return &cells_[Offset(index)];
}

GridCell& SemanticGrid::MutableCell(const Eigen::Vector2i& index) {
  EnsureContains(index, index);
  return cells_[Offset(index)];
}

void SemanticGrid::EnsureContains(const Eigen::Vector2i& lo,
                                  const Eigen::Vector2i& hi) {
  if (size_.x() > 0 && Contains(lo) && Contains(hi)) return;

  Eigen::Vector2i new_min = lo.cwiseMin(hi);
  Eigen::Vector2i new_max = lo.cwiseMax(hi);
  if (size_.x() > 0) {
    new_min = new_min.cwiseMin(min_index_);
    new_max = new_max.cwiseMax(min_index_ + size_ - Eigen::Vector2i::Ones());
  }
  new_min.array() -= kGrowthMargin;
  new_max.array() += kGrowthMargin;
  const Eigen::Vector2i new_size = new_max - new_min + Eigen::Vector2i::Ones();

  std::vector<GridCell> grown(static_cast<std::size_t>(new_size.x()) *
                              new_size.y());
  for (int y = 0; y < size_.y(); ++y) {
    for (int x = 0; x < size_.x(); ++x) {
      const Eigen::Vector2i rel = min_index_ + Eigen::Vector2i(x, y) - new_min;
      grown[static_cast<std::size_t>(rel.y()) * new_size.x() + rel.x()] =
          std::move(cells_[static_cast<std::size_t>(y) * size_.x() + x]);
    }
  }
  cells_ = std::move(grown);
  min_index_ = new_min;
  size_ = new_size;
}

std::vector<Eigen::Vector2i> BresenhamLine(const Eigen::Vector2i& a,
                                           const Eigen::Vector2i& b) {
  std::vector<Eigen::Vector2i> line;
  int x = a.x();
  int y = a.y();
  const int dx = std::abs(b.x() - a.x());
  const int dy = -std::abs(b.y() - a.y());
  const int sx = a.x() < b.x() ? 1 : -1;
  const int sy = a.y() < b.y() ? 1 : -1;
  int err = dx + dy;
  line.reserve(static_cast<std::size_t>(std::max(dx, -dy)) + 1);
  while (true) {
    line.emplace_back(x, y);
    if (x == b.x() && y == b.y()) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
  return line;
}

void SemanticGrid::InsertRay(const Eigen::Vector2d& origin,
                             const Eigen::Vector2d& endpoint, Label label) {
  const Eigen::Vector2i begin = CellIndex(origin);
  const Eigen::Vector2i end = CellIndex(endpoint);
  EnsureContains(begin.cwiseMin(end), begin.cwiseMax(end));
  const auto line = BresenhamLine(begin, end);
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    ++cells_[Offset(line[i])].misses;
  }
  cells_[Offset(end)].AddHit(label);
}

std::uint64_t SemanticGrid::TotalHits() const {
  std::uint64_t total = 0;
  for (const auto& cell : cells_) total += cell.TotalHits();
  return total;
}

std::size_t SemanticGrid::OccupiedCells() const {
  return static_cast<std::size_t>(std::count_if(
      cells_.begin(), cells_.end(),
      [](const GridCell& c) { return !c.hits.empty(); }));
}

SemanticGrid SemanticGrid::FromParts(double resolution, const Pose3& local_pose,
                                     const Eigen::Vector2i& min_index,
                                     const Eigen::Vector2i& size,
                                     std::vector<GridCell> cells) {
  if (size.x() < 0 || size.y() < 0 ||
      cells.size() != static_cast<std::size_t>(size.x()) * size.y()) {
    throw Error("grid dimensions do not match cell payload");
  }
  SemanticGrid grid(resolution, local_pose);
  grid.min_index_ = min_index;
  grid.size_ = size;
  grid.cells_ = std::move(cells);
  return grid;
}

}  // namespace semslam::submaps
