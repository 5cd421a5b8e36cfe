#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "semslam/core/pose.h"
#include "semslam/core/types.h"
#include "semslam/local_map/voxel_map.h"

namespace semslam::registration {

// Constant-velocity model: the next inter-scan motion equals the last one.
inline Pose3 PredictMotion(const Pose3& prev_relative) { return prev_relative; }

// Label fitness of a correspondence. The source confidence is clamped to
// [confidence_min, confidence_max]; matching labels return it, mismatching
// labels its complement, and pairs with an unlabeled side kappa_neutral.
double Kappa(Label source_label, Label target_label, double confidence,
             const SemanticConfig& cfg);

// IRLS weight of the Geman-McClure kernel rho(r) = (r^2 / 2) / (1 + r^2 /
// sigma^2), normalized to 1 at r = 0: sigma^4 / (sigma^2 + r^2)^2.
double GemanMcClureWeight(double residual, double sigma);
double GemanMcClureLoss(double residual, double sigma);

// Tracks the model deviation between predicted and registered poses and
// derives the correspondence distance threshold from its running RMS.
class AdaptiveThreshold {
 public:
  explicit AdaptiveThreshold(double initial_threshold = 2.0,
                             double min_motion = 0.1, double max_range = 100.0);

  // Accumulates the deviation of computed from predicted (if it exceeds
  // min_motion) and returns the new threshold.
  double Update(const Pose3& predicted, const Pose3& computed);
  double Threshold() const;

  double sigma_sq_accum() const { return sigma_sq_accum_; }
  int sample_count() const { return sample_count_; }
  double initial_threshold() const { return initial_threshold_; }
  double min_motion() const { return min_motion_; }

 private:
  double sigma_sq_accum_ = 0.0;
  int sample_count_ = 0;
  double initial_threshold_;
  double min_motion_;
  double max_range_;
};

struct Correspondence {
  Eigen::Vector3d source;  // sensor frame
  Eigen::Vector3d target;  // world frame
  Label source_label = kUnlabeled;
  Label target_label = kUnlabeled;
  double source_confidence = 1.0;
};

// Nearest-neighbor associations of the transformed source within tau.
std::vector<Correspondence> FindCorrespondences(
    std::span<const LabeledPoint> source,
    const local_map::SemanticVoxelMap& map, const Pose3& pose, double tau);

// Label-fitness factor entering the IRLS weight. Kappa is divided by
// confidence_max so a confident label match weighs exactly 1; the scale is
// uniform and does not move the argmin.
double SemanticFactor(const Correspondence& c, const SemanticConfig& cfg);

// Per-correspondence IRLS weights: GemanMcClureWeight(r, sigma) times the
// semantic factor (or 1 when semantic is false).
std::vector<double> CorrespondenceWeights(std::span<const Correspondence> corrs,
                                          const Pose3& pose, double sigma,
                                          const SemanticConfig& cfg,
                                          bool semantic);

// Robust objective sum_i factor_i * rho(|T s_i - q_i|).
double RobustObjective(std::span<const Correspondence> corrs, const Pose3& pose,
                       double sigma, const SemanticConfig& cfg, bool semantic);

// d(exp(xi) * p)/d(xi) at xi = 0 for a world point p = T s, with xi stacked
// as (rotation, translation).
Eigen::Matrix<double, 3, 6> PointJacobian(const Eigen::Vector3d& world_point);

// One weighted Gauss-Newton step; the update is applied as exp(dx) * pose.
Twist6 GaussNewtonStep(std::span<const Correspondence> corrs,
                       std::span<const double> weights, const Pose3& pose);

struct RegistrationOptions {
  int max_iterations = 500;
  double convergence = 1e-4;
  bool semantic_weighting = true;
};

struct RegistrationResult {
  Pose3 pose;  // world-from-sensor
  int iterations = 0;
  std::size_t final_correspondences = 0;
  bool converged = false;
};

RegistrationResult RegisterScan(const Scan& source,
                                const local_map::SemanticVoxelMap& map,
                                const Pose3& initial, double tau,
                                const SemanticConfig& cfg,
                                const RegistrationOptions& options = {});

}  // namespace semslam::registration
