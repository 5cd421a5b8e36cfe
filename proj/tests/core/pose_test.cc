#include "semslam/core/pose.h"

#include <numbers>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "support/test_support.h"

namespace semslam {
namespace {

using testing::RandomPose;
using testing::RandomTwist;

void ExpectPoseNear(const Pose3& a, const Pose3& b, double tol) {
  EXPECT_LT((a.RotationMatrix() - b.RotationMatrix()).cwiseAbs().maxCoeff(), tol);
  EXPECT_LT((a.translation() - b.translation()).cwiseAbs().maxCoeff(), tol);
}

TEST(Se3Exp, ZeroTwistIsIdentity) {
  ExpectPoseNear(Se3Exp(Twist6{}), Pose3::Identity(), 1e-15);
}

TEST(Se3Exp, PureTranslation) {
  const Pose3 p = Se3Exp(Twist6({0, 0, 0}, {1, 2, 3}));
  EXPECT_TRUE(p.RotationMatrix().isIdentity(1e-15));
  EXPECT_TRUE(p.translation().isApprox(Eigen::Vector3d(1, 2, 3)));
}

TEST(Se3Exp, QuarterTurnAboutZ) {
  const Pose3 p = Se3Exp(Twist6({0, 0, std::numbers::pi / 2}, {0, 0, 0}));
  const Eigen::Vector3d x = p * Eigen::Vector3d(1, 0, 0);
  EXPECT_NEAR(x.x(), 0.0, 1e-9);
  EXPECT_NEAR(x.y(), 1.0, 1e-9);
  EXPECT_NEAR(x.z(), 0.0, 1e-9);
}

TEST(Se3Exp, MatchesMatrixExponentialSeries) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Twist6 xi = RandomTwist(rng, 3.0, 5.0);
    Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
    a.topLeftCorner<3, 3>() = Hat(xi.rotation);
    a.topRightCorner<3, 1>() = xi.translation;
    // Taylor series of the 4x4 matrix exponential as an independent oracle.
    Eigen::Matrix4d sum = Eigen::Matrix4d::Identity(), term = Eigen::Matrix4d::Identity();
    for (int k = 1; k < 60; ++k) {
      term = term * a / k;
      sum += term;
    }
    EXPECT_LT((Se3Exp(xi).Matrix() - sum).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Se3Exp, SmallAngleBranchIsContinuous) {
  const Eigen::Vector3d axis = Eigen::Vector3d(1, -2, 0.5).normalized();
  const Eigen::Vector3d v(0.3, -0.1, 2.0);
  const Pose3 below = Se3Exp(Twist6(axis * (1e-8 * (1.0 - 1e-9)), v));
  const Pose3 above = Se3Exp(Twist6(axis * (1e-8 * (1.0 + 1e-9)), v));
  ExpectPoseNear(below, above, 1e-12);
}

TEST(Se3Exp, SeriesBranchIsContinuous) {
  const Eigen::Vector3d axis = Eigen::Vector3d(0.2, 1, -0.7).normalized();
  const Eigen::Vector3d v(-1.5, 0.4, 0.9);
  for (const double theta : {1e-3, 1e-6}) {
    const Pose3 below = Se3Exp(Twist6(axis * (theta * (1.0 - 1e-12)), v));
    const Pose3 above = Se3Exp(Twist6(axis * (theta * (1.0 + 1e-12)), v));
    ExpectPoseNear(below, above, 1e-12);
    const Twist6 back = Se3Log(below);
    EXPECT_LT((back.translation - v).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Se3Log, IdentityIsZero) {
  EXPECT_TRUE(Se3Log(Pose3::Identity()).AsVector().isZero(1e-15));
}

TEST(Se3Log, PureTranslation) {
  const Twist6 xi = Se3Log(Pose3::FromTranslation({4, -5, 6}));
  EXPECT_TRUE(xi.rotation.isZero(1e-15));
  EXPECT_TRUE(xi.translation.isApprox(Eigen::Vector3d(4, -5, 6)));
}

TEST(Se3Log, RoundTripsExp) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const Twist6 xi = RandomTwist(rng, 3.0, 10.0);
    const Twist6 back = Se3Log(Se3Exp(xi));
    EXPECT_LT((back.AsVector() - xi.AsVector()).cwiseAbs().maxCoeff(), 1e-9)
        << "trial " << trial;
  }
}

TEST(Se3Log, HalfTurnThrows) {
  const Pose3 half(Eigen::Quaterniond(Eigen::AngleAxisd(std::numbers::pi,
                                                        Eigen::Vector3d::UnitZ())),
                   Eigen::Vector3d::Zero());
  try {
    Se3Log(half);
    FAIL() << "expected a throw";
  } catch (const std::domain_error& e) {
    EXPECT_STREQ(e.what(), "log branch singularity");
  }
}

TEST(Pose3, TransformPointExamples) {
  EXPECT_TRUE((Pose3::Identity() * Eigen::Vector3d(5, 6, 7)).isApprox(Eigen::Vector3d(5, 6, 7)));
  EXPECT_TRUE(TransformPoint(Pose3::FromTranslation({1, 0, 0}), Eigen::Vector3d::Zero())
                  .isApprox(Eigen::Vector3d(1, 0, 0)));
}

TEST(Pose3, GroupAxioms) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const Pose3 a = RandomPose(rng, std::numbers::pi, 20.0);
    const Pose3 b = RandomPose(rng, std::numbers::pi, 20.0);
    const Pose3 c = RandomPose(rng, std::numbers::pi, 20.0);
    const Eigen::Vector3d x = Eigen::Vector3d::Random() * 10.0;

    ExpectPoseNear(Compose(a, Inverse(a)), Pose3::Identity(), 1e-9);
    ExpectPoseNear(Compose(Inverse(a), a), Pose3::Identity(), 1e-9);
    ExpectPoseNear((a * b) * c, a * (b * c), 1e-9);
    EXPECT_LT((TransformPoint(a * b, x) - TransformPoint(a, TransformPoint(b, x)))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-9);
    const Eigen::Matrix3d r = (a * b).RotationMatrix();
    EXPECT_LT((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-9);
  }
}

TEST(Pose3, QuaternionStaysNormalizedOverLongChains) {
  std::mt19937_64 rng(8);
  const Pose3 step = RandomPose(rng, 0.05, 1.0);
  Pose3 p;
  for (int i = 0; i < 100000; ++i) p = p * step;
  EXPECT_NEAR(p.rotation().norm(), 1.0, 1e-12);
}

TEST(Pose3, MatrixRoundTrip) {
  std::mt19937_64 rng(9);
  const Pose3 p = RandomPose(rng, 2.0, 5.0);
  ExpectPoseNear(Pose3::FromMatrix(p.Matrix()), p, 1e-12);
}

TEST(Pose3, YawOfYawPose) {
  EXPECT_NEAR(Pose3::FromYaw(0.7).Yaw(), 0.7, 1e-12);
  EXPECT_NEAR(Pose3::FromYaw(-2.5).Yaw(), -2.5, 1e-12);
}

TEST(Pose3, AngleOfAxisAngle) {
  const Pose3 p(Eigen::Quaterniond(Eigen::AngleAxisd(0.3, Eigen::Vector3d::UnitX())),
                Eigen::Vector3d::Zero());
  EXPECT_NEAR(p.Angle(), 0.3, 1e-12);
}

}  // namespace
}  // namespace semslam
