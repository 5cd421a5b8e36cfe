#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "semslam/core/pose.h"
#include "semslam/core/types.h"

namespace semslam::evaluation {

template <int Dim>
using Points = std::vector<Eigen::Matrix<double, Dim, 1>>;

template <int Dim>
struct Similarity {
  Eigen::Matrix<double, Dim, Dim> rotation =
      Eigen::Matrix<double, Dim, Dim>::Identity();
  Eigen::Matrix<double, Dim, 1> translation =
      Eigen::Matrix<double, Dim, 1>::Zero();
  double scale = 1.0;

  Eigen::Matrix<double, Dim, 1> operator*(
      const Eigen::Matrix<double, Dim, 1>& p) const {
    return scale * (rotation * p) + translation;
  }
};

// Least-squares s, R, t minimizing sum |gt_i - (s R est_i + t)|^2. Throws
// Error on size mismatch, fewer than 3 points, or a covariance of rank below
// Dim - 1.
template <int Dim>
Similarity<Dim> UmeyamaAlign(const Points<Dim>& est, const Points<Dim>& gt,
                             bool with_scale) {
  using Vec = Eigen::Matrix<double, Dim, 1>;
  using Mat = Eigen::Matrix<double, Dim, Dim>;
  if (est.size() != gt.size()) throw Error("trajectory length mismatch");
  if (est.size() < 3) throw Error("alignment needs at least 3 positions");
  const double n = static_cast<double>(est.size());

  Vec mean_est = Vec::Zero(), mean_gt = Vec::Zero();
  for (std::size_t i = 0; i < est.size(); ++i) {
    mean_est += est[i];
    mean_gt += gt[i];
  }
  mean_est /= n;
  mean_gt /= n;

  Mat cov = Mat::Zero();
  double var_est = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const Vec de = est[i] - mean_est;
    cov += (gt[i] - mean_gt) * de.transpose();
    var_est += de.squaredNorm();
  }
  cov /= n;
  var_est /= n;

  Eigen::JacobiSVD<Mat> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec sv = svd.singularValues();
  const double tol = std::max(sv(0), 1e-300) * 1e-10;
  int rank = 0;
  for (int i = 0; i < Dim; ++i) rank += sv(i) > tol ? 1 : 0;
  if (sv(0) <= 0.0 || rank < Dim - 1) throw Error("degenerate covariance");

  Vec signs = Vec::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
    signs(Dim - 1) = -1.0;
  }
  Similarity<Dim> out;
  out.rotation = svd.matrixU() * signs.asDiagonal() * svd.matrixV().transpose();
  out.scale = with_scale ? sv.dot(signs) / var_est : 1.0;
  out.translation = mean_gt - out.scale * out.rotation * mean_est;
  return out;
}

// 3D alignment as a pose plus scale.
struct Alignment {
  Pose3 transform;
  double scale = 1.0;
};
Alignment UmeyamaAlign(const std::vector<Eigen::Vector3d>& est,
                       const std::vector<Eigen::Vector3d>& gt, bool with_scale);

enum class AteMode { k3d, k2d };

struct AteOptions {
  AteMode mode = AteMode::k3d;
  bool align = true;
  bool with_scale = false;
};

std::vector<Eigen::Vector3d> Positions(const std::vector<Pose3>& trajectory);

// RMSE of position differences; 2D drops z before aligning.
double Ate(const std::vector<Pose3>& est, const std::vector<Pose3>& gt,
           const AteOptions& options = {});

// Per-pose position errors after the same alignment as Ate.
std::vector<double> PerPoseError(const std::vector<Pose3>& est,
                                 const std::vector<Pose3>& gt,
                                 const AteOptions& options = {});

struct RteResult {
  double translation_percent = 0.0;
  double rotation_deg_per_m = 0.0;
  int segments = 0;
};

// KITTI segment metric over lengths 100..800 m from every start index.
// Throws Error("no valid segments") when the trajectory is too short.
RteResult RteKitti(const std::vector<Pose3>& est, const std::vector<Pose3>& gt);

// Componentwise RMSE, after rigid 3D alignment when aligned is set.
Eigen::Vector3d PerAxisError(const std::vector<Pose3>& est,
                             const std::vector<Pose3>& gt, bool aligned);

// index,error,ex,ey,ez per pose.
void WriteApeCsv(const std::vector<Pose3>& est, const std::vector<Pose3>& gt,
                 const AteOptions& options, const std::filesystem::path& path);

}  // namespace semslam::evaluation
