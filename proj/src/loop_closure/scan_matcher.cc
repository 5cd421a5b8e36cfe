#include "semslam/loop_closure/scan_matcher.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace semslam::loop_closure {
namespace {

// Guards the dequantized bound against summation rounding in the exact leaf
// scores.
constexpr double kBoundSlack = 1e-6;

struct Key {
  int k, i, j;
  bool operator<(const Key& o) const {
    return std::tie(k, i, j) < std::tie(o.k, o.i, o.j);
  }
};

class CandidateEvaluator {
 public:
  CandidateEvaluator(const MaxGridPyramid& pyramid, const Scan2D& scan,
                     const Se2& center, const SearchWindow& window)
      : pyramid_(pyramid),
        center_(center),
        disc_(Discretize(scan, pyramid.resolution(), window)) {
    const double res = pyramid.resolution();
    layers_.reserve(scan.size());
    for (const auto& p : scan) layers_.push_back(pyramid.LayerOf(p.label));
    cells_.resize(2 * disc_.num_angles + 1);
    for (int k = -disc_.num_angles; k <= disc_.num_angles; ++k) {
      const Se2 rotated(center.x, center.y,
                        center.theta + k * disc_.angular_step);
      const Eigen::Matrix2d r = rotated.Rotation();
      auto& cells = cells_[k + disc_.num_angles];
      cells.reserve(scan.size());
      for (const auto& p : scan) {
        const Eigen::Vector2d world = r * p.position + center.translation();
        cells.push_back((world / res).array().floor().cast<int>());
      }
    }
  }

  const SearchDiscretization& disc() const { return disc_; }
  std::size_t num_points() const { return layers_.size(); }

  double LeafSum(const Key& key) const {
    const auto& cells = cells_[key.k + disc_.num_angles];
    const Eigen::Vector2i offset(key.i, key.j);
    double sum = 0.0;
    for (std::size_t n = 0; n < cells.size(); ++n) {
      sum += pyramid_.BaseValue(layers_[n], cells[n] + offset);
    }
    return sum;
  }

  // Upper bound on LeafSum over the 2^level block starting at key.
  double BoundSum(int level, const Key& key) const {
    if (level == 0) return LeafSum(key);
    const auto& cells = cells_[key.k + disc_.num_angles];
    const Eigen::Vector2i offset(key.i, key.j);
    std::int64_t sum = 0;
    for (std::size_t n = 0; n < cells.size(); ++n) {
      sum += pyramid_.QuantizedBound(level, layers_[n], cells[n] + offset);
    }
    return static_cast<double>(sum) / 255.0 + kBoundSlack;
  }

  MatchResult Result(const Key& key, double sum) const {
    const double res = pyramid_.resolution();
    return {Se2(center_.x + key.i * res, center_.y + key.j * res,
                NormalizeAngle(center_.theta + key.k * disc_.angular_step)),
            sum / static_cast<double>(num_points())};
  }

 private:
  const MaxGridPyramid& pyramid_;
  Se2 center_;
  SearchDiscretization disc_;
  std::vector<int> layers_;
  std::vector<std::vector<Eigen::Vector2i>> cells_;
};

struct Node {
  Key key;
  double bound;
};

class BranchAndBound {
 public:
  BranchAndBound(const CandidateEvaluator& eval, double min_sum,
                 MatchStats* stats)
      : eval_(eval), min_sum_(min_sum), stats_(stats) {}

  void Run(int depth) {
    const auto& d = eval_.disc();
    const int step = 1 << depth;
    std::vector<Node> roots;
    for (int k = -d.num_angles; k <= d.num_angles; ++k) {
      for (int i = -d.num_x; i <= d.num_x; i += step) {
        for (int j = -d.num_y; j <= d.num_y; j += step) {
          const Key key{k, i, j};
          roots.push_back({key, Bound(depth, key)});
        }
      }
    }
    SortNodes(roots);
    for (const auto& node : roots) Visit(depth, node);
  }

  bool found() const { return found_; }
  const Key& best_key() const { return best_key_; }
  double best_sum() const { return best_sum_; }

 private:
  double Bound(int level, const Key& key) {
    if (stats_ != nullptr) ++stats_->nodes_evaluated;
    return eval_.BoundSum(level, key);
  }

  static void SortNodes(std::vector<Node>& nodes) {
    std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) {
      if (a.bound != b.bound) return a.bound > b.bound;
      return a.key < b.key;
    });
  }

  bool Prune(const Node& node) const {
    if (node.bound < min_sum_) return true;
    if (!found_) return false;
    if (node.bound < best_sum_) return true;
    // Every leaf below has a key >= node.key, so it can only win by
    // scoring strictly higher.
    return best_key_ < node.key && node.bound <= best_sum_;
  }

  void Visit(int level, const Node& node) {
    if (Prune(node)) return;
    if (level == 0) {
      if (stats_ != nullptr) ++stats_->leaves_evaluated;
      const double sum = node.bound;
      if (sum < min_sum_) return;
      if (!found_ || sum > best_sum_ ||
          (sum == best_sum_ && node.key < best_key_)) {
        found_ = true;
        best_sum_ = sum;
        best_key_ = node.key;
      }
      return;
    }
    const auto& d = eval_.disc();
    const int s = 1 << (level - 1);
    std::vector<Node> children;
    children.reserve(4);
    for (const int di : {0, s}) {
      for (const int dj : {0, s}) {
        const Key key{node.key.k, node.key.i + di, node.key.j + dj};
        if (key.i > d.num_x || key.j > d.num_y) continue;
        children.push_back({key, Bound(level - 1, key)});
      }
    }
    SortNodes(children);
    for (const auto& child : children) Visit(level - 1, child);
  }

  const CandidateEvaluator& eval_;
  double min_sum_;
  MatchStats* stats_;
  bool found_ = false;
  Key best_key_{0, 0, 0};
  double best_sum_ = -std::numeric_limits<double>::infinity();
};

double MinSum(double min_score, std::size_t n) {
  return min_score * static_cast<double>(n) - kBoundSlack;
}

}  // namespace

double Score(const submaps::SemanticGrid& grid, const Scan2D& scan,
             const Se2& pose) {
  if (scan.empty()) return 0.0;
  const Eigen::Matrix2d r = pose.Rotation();
  double sum = 0.0;
  for (const auto& p : scan) {
    const Eigen::Vector2d world = r * p.position + pose.translation();
    const auto* cell = grid.Cell(grid.CellIndex(world));
    if (cell == nullptr || cell->hits.empty()) continue;
    sum += p.label == kUnlabeled ? submaps::DominantLabelOf(*cell).hit_fraction
                                 : submaps::HitFraction(*cell, p.label);
  }
  return sum / static_cast<double>(scan.size());
}

SearchDiscretization Discretize(const Scan2D& scan, double resolution,
                                const SearchWindow& window) {
  double d_max = 0.0;
  for (const auto& p : scan) d_max = std::max(d_max, p.position.norm());
  SearchDiscretization d;
  if (d_max > 0.0) {
    const double arg =
        std::clamp(1.0 - resolution * resolution / (2.0 * d_max * d_max), -1.0, 1.0);
    d.angular_step = std::acos(arg);
  } else {
    d.angular_step = std::numbers::pi;
  }
  constexpr double kEps = 1e-9;
  d.num_angles = d.angular_step > 0.0
                     ? static_cast<int>(std::floor(window.theta / d.angular_step + kEps))
                     : 0;
  d.num_x = static_cast<int>(std::floor(window.x / resolution + kEps));
  d.num_y = static_cast<int>(std::floor(window.y / resolution + kEps));
  return d;
}

std::optional<MatchResult> BranchAndBoundMatch(const MaxGridPyramid& pyramid,
                                               const Scan2D& scan,
                                               const Se2& center,
                                               const SearchWindow& window,
                                               double min_score,
                                               MatchStats* stats) {
  if (scan.empty()) return std::nullopt;
  const CandidateEvaluator eval(pyramid, scan, center, window);
  BranchAndBound search(eval, MinSum(min_score, scan.size()), stats);
  search.Run(pyramid.depth());
  if (!search.found()) return std::nullopt;
  auto result = eval.Result(search.best_key(), search.best_sum());
  if (result.score < min_score) return std::nullopt;
  return result;
}

std::optional<MatchResult> ExhaustiveMatch(const MaxGridPyramid& pyramid,
                                           const Scan2D& scan,
                                           const Se2& center,
                                           const SearchWindow& window,
                                           double min_score) {
  if (scan.empty()) return std::nullopt;
  const CandidateEvaluator eval(pyramid, scan, center, window);
  const auto& d = eval.disc();
  bool found = false;
  Key best{0, 0, 0};
  double best_sum = 0.0;
  for (int k = -d.num_angles; k <= d.num_angles; ++k) {
    for (int i = -d.num_x; i <= d.num_x; ++i) {
      for (int j = -d.num_y; j <= d.num_y; ++j) {
        const Key key{k, i, j};
        const double sum = eval.LeafSum(key);
        if (!found || sum > best_sum) {
          found = true;
          best_sum = sum;
          best = key;
        }
      }
    }
  }
  auto result = eval.Result(best, best_sum);
  if (result.score < min_score) return std::nullopt;
  return result;
}

}  // namespace semslam::loop_closure
