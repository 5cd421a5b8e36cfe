#pragma once

#include <cmath>

#include <Eigen/Core>

#include "semslam/core/pose.h"

namespace semslam::loop_closure {

double NormalizeAngle(double angle);

struct Se2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Se2() = default;
  Se2(double x, double y, double theta) : x(x), y(y), theta(theta) {}

  Eigen::Vector2d translation() const { return {x, y}; }
  Eigen::Matrix2d Rotation() const;

  Se2 inverse() const;
  Se2 operator*(const Se2& rhs) const;
  Eigen::Vector2d operator*(const Eigen::Vector2d& p) const {
    return Rotation() * p + translation();
  }

  // Ground-plane projection: translation x, y and the heading of the x-axis.
  static Se2 FromPose3(const Pose3& pose);
  // Yaw-only 3D pose at height z.
  Pose3 ToPose3(double z = 0.0) const;
};

// (V^-1 t, theta), the exact SE(2) logarithm.
Eigen::Vector3d Se2Log(const Se2& pose);

// Replaces x, y and yaw of a 3D pose, keeping its z, roll and pitch.
Pose3 ReattachHeightAndTilt(const Se2& planar, const Pose3& reference);

}  // namespace semslam::loop_closure
