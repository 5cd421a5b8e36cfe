#include "semslam/registration/registration.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

namespace semslam::registration {

double Kappa(Label source_label, Label target_label, double confidence,
             const SemanticConfig& cfg) {
  if (source_label == kUnlabeled || target_label == kUnlabeled) {
    return cfg.kappa_neutral;
  }
  const double p =
      std::clamp(confidence, cfg.confidence_min, cfg.confidence_max);
  return source_label == target_label ? p : 1.0 - p;
}

double GemanMcClureWeight(double residual, double sigma) {
  const double sigma2 = sigma * sigma;
  const double denom = sigma2 + residual * residual;
  return (sigma2 * sigma2) / (denom * denom);
}

double GemanMcClureLoss(double residual, double sigma) {
  const double r2 = residual * residual;
  return 0.5 * r2 / (1.0 + r2 / (sigma * sigma));
}

AdaptiveThreshold::AdaptiveThreshold(double initial_threshold,
                                     double min_motion, double max_range)
    : initial_threshold_(initial_threshold),
      min_motion_(min_motion),
      max_range_(max_range) {}

double AdaptiveThreshold::Update(const Pose3& predicted,
                                 const Pose3& computed) {
  const Pose3 deviation = predicted.inverse() * computed;
  const double rotational = 2.0 * max_range_ * std::sin(0.5 * deviation.Angle());
  const double model_error = deviation.translation().norm() + rotational;
  if (model_error > min_motion_) {
    sigma_sq_accum_ += model_error * model_error;
    ++sample_count_;
  }
  return Threshold();
}

double AdaptiveThreshold::Threshold() const {
  if (sample_count_ < 1) return initial_threshold_;
  return 3.0 * std::sqrt(sigma_sq_accum_ / sample_count_);
}

std::vector<Correspondence> FindCorrespondences(
    std::span<const LabeledPoint> source,
    const local_map::SemanticVoxelMap& map, const Pose3& pose, double tau) {
  std::vector<Correspondence> corrs;
  corrs.reserve(source.size());
  for (const auto& point : source) {
    const auto neighbor = map.NearestNeighbor(pose * point.position, tau);
    if (!neighbor) continue;
    corrs.push_back({point.position, neighbor->point.position, point.label,
                     neighbor->point.label, point.confidence});
  }
  return corrs;
}

double SemanticFactor(const Correspondence& c, const SemanticConfig& cfg) {
  return Kappa(c.source_label, c.target_label, c.source_confidence, cfg) /
         cfg.confidence_max;
}

std::vector<double> CorrespondenceWeights(std::span<const Correspondence> corrs,
                                          const Pose3& pose, double sigma,
                                          const SemanticConfig& cfg,
                                          bool semantic) {
  std::vector<double> weights(corrs.size());
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    const double r = (pose * corrs[i].source - corrs[i].target).norm();
    weights[i] = GemanMcClureWeight(r, sigma);
    if (semantic) weights[i] *= SemanticFactor(corrs[i], cfg);
  }
  return weights;
}

double RobustObjective(std::span<const Correspondence> corrs, const Pose3& pose,
                       double sigma, const SemanticConfig& cfg, bool semantic) {
  double total = 0.0;
  for (const auto& c : corrs) {
    const double r = (pose * c.source - c.target).norm();
    total += (semantic ? SemanticFactor(c, cfg) : 1.0) *
             GemanMcClureLoss(r, sigma);
  }
  return total;
}

Eigen::Matrix<double, 3, 6> PointJacobian(const Eigen::Vector3d& world_point) {
  Eigen::Matrix<double, 3, 6> j;
  j.leftCols<3>() = -Hat(world_point);
  j.rightCols<3>().setIdentity();
  return j;
}

Twist6 GaussNewtonStep(std::span<const Correspondence> corrs,
                       std::span<const double> weights, const Pose3& pose) {
  Eigen::Matrix<double, 6, 6> jtj = Eigen::Matrix<double, 6, 6>::Zero();
  Vector6d jtr = Vector6d::Zero();
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    const Eigen::Vector3d p = pose * corrs[i].source;
    const Eigen::Vector3d residual = p - corrs[i].target;
    const Eigen::Matrix<double, 3, 6> j = PointJacobian(p);
    jtj.noalias() += weights[i] * j.transpose() * j;
    jtr.noalias() += weights[i] * j.transpose() * residual;
  }
  return Twist6::FromVector(jtj.ldlt().solve(-jtr));
}

RegistrationResult RegisterScan(const Scan& source,
                                const local_map::SemanticVoxelMap& map,
                                const Pose3& initial, double tau,
                                const SemanticConfig& cfg,
                                const RegistrationOptions& options) {
  RegistrationResult result;
  result.pose = initial;
  if (source.empty() || map.empty() || !(tau > 0.0)) return result;

  const double sigma = tau / 3.0;
  Pose3 estimate = initial;
  for (int iteration = 1; iteration <= options.max_iterations; ++iteration) {
    const auto corrs = FindCorrespondences(source.points, map, estimate, tau);
    result.iterations = iteration;
    result.final_correspondences = corrs.size();
    if (corrs.empty()) {
      result.pose = initial;
      result.converged = false;
      return result;
    }
    const auto weights = CorrespondenceWeights(corrs, estimate, sigma, cfg,
                                               options.semantic_weighting);
    const Twist6 dx = GaussNewtonStep(corrs, weights, estimate);
    estimate = Se3Exp(dx) * estimate;
    if (dx.AsVector().norm() < options.convergence) {
      result.converged = true;
      break;
    }
  }
  result.pose = estimate;
  return result;
}

}  // namespace semslam::registration
