#include "semslam/loop_closure/se2.h"

#include <numbers>

namespace semslam::loop_closure {

double NormalizeAngle(double angle) {
  angle = std::remainder(angle, 2.0 * std::numbers::pi);
  return angle;
}

Eigen::Matrix2d Se2::Rotation() const {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

Se2 Se2::inverse() const {
  const Eigen::Vector2d t = -(Rotation().transpose() * translation());
  return {t.x(), t.y(), NormalizeAngle(-theta)};
}

Se2 Se2::operator*(const Se2& rhs) const {
  const Eigen::Vector2d t = Rotation() * rhs.translation() + translation();
  return {t.x(), t.y(), NormalizeAngle(theta + rhs.theta)};
}

Se2 Se2::FromPose3(const Pose3& pose) {
  return {pose.translation().x(), pose.translation().y(), pose.Yaw()};
}

Pose3 Se2::ToPose3(double z) const {
  return Pose3::FromYaw(theta, Eigen::Vector3d(x, y, z));
}

Eigen::Vector3d Se2Log(const Se2& pose) {
  const double theta = pose.theta;
  const double half = 0.5 * theta;
  const double a = std::abs(theta) < 1e-8
                       ? 1.0 - theta * theta / 12.0
                       : half * std::cos(half) / std::sin(half);
  Eigen::Matrix2d v_inv;
  v_inv << a, half, -half, a;
  const Eigen::Vector2d t = v_inv * pose.translation();
  return {t.x(), t.y(), theta};
}

Pose3 ReattachHeightAndTilt(const Se2& planar, const Pose3& reference) {
  // reference = Rz(yaw) * tilt; swap the yaw, keep the tilt.
  const Eigen::Quaterniond yaw_ref(
      Eigen::AngleAxisd(reference.Yaw(), Eigen::Vector3d::UnitZ()));
  const Eigen::Quaterniond tilt = yaw_ref.conjugate() * reference.rotation();
  const Eigen::Quaterniond yaw_new(
      Eigen::AngleAxisd(planar.theta, Eigen::Vector3d::UnitZ()));
  return {yaw_new * tilt,
          Eigen::Vector3d(planar.x, planar.y, reference.translation().z())};
}

}  // namespace semslam::loop_closure
