#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "semslam/core/types.h"

namespace semslam::simgen {

// Vertical rectangle through center, spanning length along yaw.
struct Wall {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double yaw = 0.0;
  double length = 10.0;
  double z_min = 0.0;
  double z_max = 4.0;
  Label label = kitti_labels::kBuilding;
};

struct Cylinder {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 0.1;
  double z_min = 0.0;
  double z_max = 4.0;
  Label label = kitti_labels::kPole;
};

// Yaw-rotated box resting on the ground; size is (length, width, height).
struct Box {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double yaw = 0.0;
  Eigen::Vector3d size{4.2, 1.8, 1.5};
  Label label = kitti_labels::kCar;
};

// Ground is the plane z = 0 over |x|, |y| <= ground_extent.
struct World {
  bool has_ground = true;
  double ground_extent = 100.0;
  Label ground_label = kitti_labels::kRoad;
  std::vector<Wall> walls;
  std::vector<Cylinder> cylinders;
  std::vector<Box> boxes;
};

struct WorldSpec {
  int walls = 0;
  int poles = 0;
  int signs = 0;
  int parked_cars = 0;
  // Boxes with a moving-car label, for dynamic filtering tests.
  int dynamic_cars = 0;
};

struct RayHit {
  double distance;
  Label label;
};

// Nearest intersection of origin + s * direction (unit) with s in
// (0, max_distance].
std::optional<RayHit> CastRay(const World& world, const Eigen::Vector3d& origin,
                              const Eigen::Vector3d& direction,
                              double max_distance);

// Distance from a point to the nearest primitive surface.
double SurfaceDistance(const World& world, const Eigen::Vector3d& point);

// Objects placed uniformly at random inside [-extent, extent]^2.
World GenerateWorld(std::uint64_t seed, const WorldSpec& spec, double extent);

// Regular surface samples at roughly the given spacing.
std::vector<LabeledPoint> SampleWorld(const World& world, double spacing);

// Compact scene around the origin: ground, three walls, four poles. Sampled
// with random jitter of up to half the spacing inside the surfaces; at least
// 2000 points.
World MakeStructuredWorld();
std::vector<LabeledPoint> MakeStructuredScene(std::uint64_t seed,
                                              double spacing = 0.25);

// Objects lining a rounded square path of the given side centered on the
// origin: buildings, poles, signs and parked cars at random offsets.
World MakeLoopWorld(std::uint64_t seed, double side, double corner_radius);

}  // namespace semslam::simgen
