#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace semslam {

using Vector6d = Eigen::Matrix<double, 6, 1>;

// Element of se(3). The rotational part comes first in the stacked 6-vector.
struct Twist6 {
  Eigen::Vector3d rotation = Eigen::Vector3d::Zero();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Twist6() = default;
  Twist6(const Eigen::Vector3d& rotation, const Eigen::Vector3d& translation)
      : rotation(rotation), translation(translation) {}

  Vector6d AsVector() const;
  static Twist6 FromVector(const Vector6d& v);

  Twist6 operator*(double s) const { return {rotation * s, translation * s}; }
};

// Rigid transform in SE(3). Orientation is kept as a unit quaternion and is
// re-normalized on every composition.
class Pose3 {
 public:
  Pose3() = default;
  Pose3(const Eigen::Quaterniond& rotation, const Eigen::Vector3d& translation);
  Pose3(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static Pose3 Identity() { return {}; }
  static Pose3 FromTranslation(const Eigen::Vector3d& translation);
  static Pose3 FromYaw(double yaw, const Eigen::Vector3d& translation =
                                       Eigen::Vector3d::Zero());
  static Pose3 FromMatrix(const Eigen::Matrix4d& m);

  const Eigen::Quaterniond& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  Eigen::Matrix3d RotationMatrix() const {
    return rotation_.toRotationMatrix();
  }
  Eigen::Matrix4d Matrix() const;

  Pose3 inverse() const;
  Pose3 operator*(const Pose3& rhs) const;
  Eigen::Vector3d operator*(const Eigen::Vector3d& point) const {
    return rotation_ * point + translation_;
  }

  // Rotation angle in [0, pi].
  double Angle() const;
  // Heading of the x-axis projected onto the ground plane.
  double Yaw() const;

 private:
  Eigen::Quaterniond rotation_ = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

inline Pose3 Compose(const Pose3& a, const Pose3& b) { return a * b; }
inline Pose3 Inverse(const Pose3& p) { return p.inverse(); }
inline Eigen::Vector3d TransformPoint(const Pose3& p,
                                      const Eigen::Vector3d& x) {
  return p * x;
}

Eigen::Matrix3d Hat(const Eigen::Vector3d& v);

// Closed-form exponential map; small-angle series below |omega| < 1e-8.
Pose3 Se3Exp(const Twist6& xi);

// Principal-branch logarithm. Throws std::domain_error("log branch
// singularity") when the rotation angle reaches pi.
Twist6 Se3Log(const Pose3& pose);

}  // namespace semslam
