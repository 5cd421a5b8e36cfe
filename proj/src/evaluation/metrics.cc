#include "semslam/evaluation/metrics.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace semslam::evaluation {
namespace {

void CheckLengths(const std::vector<Pose3>& est, const std::vector<Pose3>& gt) {
  if (est.size() != gt.size()) throw Error("trajectory length mismatch");
  if (est.empty()) throw Error("empty trajectory");
}

// Aligned estimate positions paired with ground truth, zero z in 2D mode.
std::vector<Eigen::Vector3d> AlignedResiduals(const std::vector<Pose3>& est,
                                              const std::vector<Pose3>& gt,
                                              const AteOptions& options) {
  CheckLengths(est, gt);
  std::vector<Eigen::Vector3d> residuals(est.size());
  if (options.mode == AteMode::k2d) {
    Points<2> e, g;
    for (std::size_t i = 0; i < est.size(); ++i) {
      e.push_back(est[i].translation().head<2>());
      g.push_back(gt[i].translation().head<2>());
    }
    Similarity<2> s;
    if (options.align) s = UmeyamaAlign<2>(e, g, options.with_scale);
    for (std::size_t i = 0; i < e.size(); ++i) {
      const Eigen::Vector2d d = s * e[i] - g[i];
      residuals[i] = Eigen::Vector3d(d.x(), d.y(), 0.0);
    }
    return residuals;
  }
  Points<3> e = Positions(est), g = Positions(gt);
  Similarity<3> s;
  if (options.align) s = UmeyamaAlign<3>(e, g, options.with_scale);
  for (std::size_t i = 0; i < e.size(); ++i) residuals[i] = s * e[i] - g[i];
  return residuals;
}

}  // namespace

Alignment UmeyamaAlign(const std::vector<Eigen::Vector3d>& est,
                       const std::vector<Eigen::Vector3d>& gt, bool with_scale) {
  const auto s = UmeyamaAlign<3>(est, gt, with_scale);
  return {Pose3(Eigen::Matrix3d(s.rotation), s.translation), s.scale};
}

std::vector<Eigen::Vector3d> Positions(const std::vector<Pose3>& trajectory) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(trajectory.size());
  for (const auto& p : trajectory) out.push_back(p.translation());
  return out;
}

double Ate(const std::vector<Pose3>& est, const std::vector<Pose3>& gt,
           const AteOptions& options) {
  const auto residuals = AlignedResiduals(est, gt, options);
  double sum = 0.0;
  for (const auto& r : residuals) sum += r.squaredNorm();
  return std::sqrt(sum / static_cast<double>(residuals.size()));
}

std::vector<double> PerPoseError(const std::vector<Pose3>& est,
                                 const std::vector<Pose3>& gt,
                                 const AteOptions& options) {
  const auto residuals = AlignedResiduals(est, gt, options);
  std::vector<double> out;
  out.reserve(residuals.size());
  for (const auto& r : residuals) out.push_back(r.norm());
  return out;
}

RteResult RteKitti(const std::vector<Pose3>& est, const std::vector<Pose3>& gt) {
  CheckLengths(est, gt);
  std::vector<double> dist(gt.size(), 0.0);
  for (std::size_t i = 1; i < gt.size(); ++i) {
    dist[i] = dist[i - 1] + (gt[i].translation() - gt[i - 1].translation()).norm();
  }
  RteResult result;
  double t_sum = 0.0, r_sum = 0.0;
  for (std::size_t first = 0; first < gt.size(); ++first) {
    for (int step = 1; step <= 8; ++step) {
      const double length = 100.0 * step;
      const auto it = std::lower_bound(dist.begin() + first, dist.end(),
                                       dist[first] + length);
      if (it == dist.end()) break;
      const std::size_t last = static_cast<std::size_t>(it - dist.begin());
      const Pose3 gt_rel = gt[first].inverse() * gt[last];
      const Pose3 est_rel = est[first].inverse() * est[last];
      const Pose3 error = gt_rel.inverse() * est_rel;
      t_sum += error.translation().norm() / length;
      r_sum += error.Angle() / length;
      ++result.segments;
    }
  }
  if (result.segments == 0) throw Error("no valid segments");
  result.translation_percent = 100.0 * t_sum / result.segments;
  result.rotation_deg_per_m = (r_sum / result.segments) * 180.0 / std::numbers::pi;
  return result;
}

Eigen::Vector3d PerAxisError(const std::vector<Pose3>& est,
                             const std::vector<Pose3>& gt, bool aligned) {
  AteOptions options;
  options.align = aligned;
  const auto residuals = AlignedResiduals(est, gt, options);
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& r : residuals) sum += r.cwiseAbs2();
  return (sum / static_cast<double>(residuals.size())).cwiseSqrt();
}

void WriteApeCsv(const std::vector<Pose3>& est, const std::vector<Pose3>& gt,
                 const AteOptions& options, const std::filesystem::path& path) {
  const auto residuals = AlignedResiduals(est, gt, options);
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "index,error,ex,ey,ez\n";
  out.precision(9);
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    const auto& r = residuals[i];
    out << i << ',' << r.norm() << ',' << r.x() << ',' << r.y() << ',' << r.z()
        << '\n';
  }
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace semslam::evaluation
