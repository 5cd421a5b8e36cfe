#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "semslam/core/types.h"
#include "semslam/loop_closure/max_grid_pyramid.h"
#include "semslam/loop_closure/se2.h"
#include "semslam/submaps/semantic_grid.h"

namespace semslam::loop_closure {

struct ScanPoint2D {
  Eigen::Vector2d position;
  Label label = kUnlabeled;
};
using Scan2D = std::vector<ScanPoint2D>;

// Mean over points of the hit fraction of the point's own label in the cell
// it lands in (dominant label fraction for unlabeled points). 0 for an empty
// scan.
double Score(const submaps::SemanticGrid& grid, const Scan2D& scan,
             const Se2& pose);

struct SearchWindow {
  double x = 7.0;
  double y = 7.0;
  double theta = 30.0 * std::numbers::pi / 180.0;
};

// Candidates are (k, i, j): yaw center + k * angular_step, translation
// center + (i, j) * resolution, |k| <= num_angles, |i| <= num_x, |j| <= num_y.
struct SearchDiscretization {
  double angular_step = 0.0;
  int num_angles = 0;
  int num_x = 0;
  int num_y = 0;

  std::int64_t CandidateCount() const {
    return std::int64_t{2 * num_angles + 1} * (2 * num_x + 1) * (2 * num_y + 1);
  }
};

// Angular step arccos(1 - r^2 / (2 d^2)), d the largest point radius.
SearchDiscretization Discretize(const Scan2D& scan, double resolution,
                                const SearchWindow& window);

struct MatchResult {
  Se2 pose;
  double score = 0.0;
};

struct MatchStats {
  std::int64_t nodes_evaluated = 0;
  std::int64_t leaves_evaluated = 0;
};

// Exact argmax of the score over the discrete window around center (ties go
// to the lexicographically smallest (k, i, j)); none if the best score is
// below min_score.
std::optional<MatchResult> BranchAndBoundMatch(
    const MaxGridPyramid& pyramid, const Scan2D& scan, const Se2& center,
    const SearchWindow& window, double min_score, MatchStats* stats = nullptr);

// Reference implementation evaluating every candidate.
std::optional<MatchResult> ExhaustiveMatch(const MaxGridPyramid& pyramid,
                                           const Scan2D& scan,
                                           const Se2& center,
                                           const SearchWindow& window,
                                           double min_score);

}  // namespace semslam::loop_closure
