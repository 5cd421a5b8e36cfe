#include "semslam/core/pose.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace semslam {
namespace {

constexpr double kSmallAngle = 1e-8;
constexpr double kBranchMargin = 1e-9;
// Below this angle the left-Jacobian coefficients use their Taylor series.
constexpr double kSeriesAngle = 1e-3;

}  // namespace

Vector6d Twist6::AsVector() const {
  Vector6d v;
  v << rotation, translation;
  return v;
}

Twist6 Twist6::FromVector(const Vector6d& v) {
  return {v.head<3>(), v.tail<3>()};
}

Pose3::Pose3(const Eigen::Quaterniond& rotation,
             const Eigen::Vector3d& translation)
    : rotation_(rotation.normalized()), translation_(translation) {}

Pose3::Pose3(const Eigen::Matrix3d& rotation,
             const Eigen::Vector3d& translation)
    : rotation_(Eigen::Quaterniond(rotation).normalized()),
      translation_(translation) {}

Pose3 Pose3::FromTranslation(const Eigen::Vector3d& translation) {
  return {Eigen::Quaterniond::Identity(), translation};
}

Pose3 Pose3::FromYaw(double yaw, const Eigen::Vector3d& translation) {
  return {Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ())),
          translation};
}

Pose3 Pose3::FromMatrix(const Eigen::Matrix4d& m) {
  return {Eigen::Matrix3d(m.topLeftCorner<3, 3>()),
          Eigen::Vector3d(m.topRightCorner<3, 1>())};
}

Eigen::Matrix4d Pose3::Matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = RotationMatrix();
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Pose3 Pose3::inverse() const {
  const Eigen::Quaterniond inv = rotation_.conjugate();
  return {inv, -(inv * translation_)};
}

Pose3 Pose3::operator*(const Pose3& rhs) const {
  return {rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_};
}

double Pose3::Angle() const {
  return 2.0 * std::atan2(rotation_.vec().norm(), std::abs(rotation_.w()));
}

double Pose3::Yaw() const {
  const Eigen::Vector3d x_axis = rotation_ * Eigen::Vector3d::UnitX();
  return std::atan2(x_axis.y(), x_axis.x());
}

Eigen::Matrix3d Hat(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),  //
      v.z(), 0.0, -v.x(),   //
      -v.y(), v.x(), 0.0;
  return m;
}

Pose3 Se3Exp(const Twist6& xi) {
  const Eigen::Vector3d& omega = xi.rotation;
  const double theta = omega.norm();
  const Eigen::Matrix3d w = Hat(omega);
  const Eigen::Matrix3d w2 = w * w;

  Eigen::Quaterniond q;
  Eigen::Matrix3d v;
  if (theta < kSmallAngle) {
    q = Eigen::Quaterniond(1.0, 0.5 * omega.x(), 0.5 * omega.y(),
                           0.5 * omega.z());
  } else {
    const double half = 0.5 * theta;
    const Eigen::Vector3d axis = omega / theta;
    q = Eigen::Quaterniond(std::cos(half), std::sin(half) * axis.x(),
                           std::sin(half) * axis.y(), std::sin(half) * axis.z());
  }
  const double theta2 = theta * theta;
  double a, b;
  if (theta < kSeriesAngle) {
    a = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
    b = 1.0 / 6.0 - theta2 / 120.0 + theta2 * theta2 / 5040.0;
  } else {
    a = (1.0 - std::cos(theta)) / theta2;
    b = (theta - std::sin(theta)) / (theta2 * theta);
  }
  v = Eigen::Matrix3d::Identity() + a * w + b * w2;
  return {q, v * xi.translation};
}

Twist6 Se3Log(const Pose3& pose) {
  Eigen::Quaterniond q = pose.rotation();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const double vec_norm = q.vec().norm();
  const double theta = 2.0 * std::atan2(vec_norm, q.w());
  if (theta > std::numbers::pi - kBranchMargin) {
    throw std::domain_error("log branch singularity");
  }

  Eigen::Vector3d omega;
  if (vec_norm < kSmallAngle) {
    // atan2(n, w) / n ~ (1 - n^2 / (3 w^2)) / w for small n.
    omega = 2.0 / q.w() * (1.0 - vec_norm * vec_norm / (3.0 * q.w() * q.w())) *
            q.vec();
  } else {
    omega = theta / vec_norm * q.vec();
  }

  const Eigen::Matrix3d w = Hat(omega);
  Eigen::Matrix3d v_inv;
  if (theta < kSeriesAngle) {
    const double theta2 = theta * theta;
    const double coeff = 1.0 / 12.0 + theta2 / 720.0 + theta2 * theta2 / 30240.0;
    v_inv = Eigen::Matrix3d::Identity() - 0.5 * w + coeff * w * w;
  } else {
    const double half = 0.5 * theta;
    const double coeff =
        (1.0 - half * std::cos(half) / std::sin(half)) / (theta * theta);
    v_inv = Eigen::Matrix3d::Identity() - 0.5 * w + coeff * w * w;
  }
  return {omega, v_inv * pose.translation()};
}

}  // namespace semslam
