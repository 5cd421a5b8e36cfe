#include "semslam/simgen/world.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace semslam::simgen {
namespace {

constexpr double kMinDistance = 1e-9;

Eigen::Vector2d Dir(double yaw) { return {std::cos(yaw), std::sin(yaw)}; }

void Consider(std::optional<RayHit>& best, double s, Label label) {
  if (!best || s < best->distance) best = RayHit{s, label};
}

std::optional<double> IntersectWall(const Wall& w, const Eigen::Vector3d& o,
                                    const Eigen::Vector3d& d) {
  const Eigen::Vector2d u = Dir(w.yaw);
  const Eigen::Vector2d n(-u.y(), u.x());
  const double denom = n.dot(d.head<2>());
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double s = n.dot(w.center - o.head<2>()) / denom;
  if (s <= kMinDistance) return std::nullopt;
  const Eigen::Vector3d p = o + s * d;
  if (std::abs(u.dot(p.head<2>() - w.center)) > 0.5 * w.length) return std::nullopt;
  if (p.z() < w.z_min || p.z() > w.z_max) return std::nullopt;
  return s;
}

std::optional<double> IntersectCylinder(const Cylinder& c, const Eigen::Vector3d& o,
                                        const Eigen::Vector3d& d) {
  const Eigen::Vector2d q = o.head<2>() - c.center;
  const Eigen::Vector2d dxy = d.head<2>();
  const double a = dxy.squaredNorm();
  if (a < 1e-15) return std::nullopt;
  const double b = 2.0 * q.dot(dxy);
  const double cc = q.squaredNorm() - c.radius * c.radius;
  const double disc = b * b - 4.0 * a * cc;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  for (const double s : {(-b - root) / (2.0 * a), (-b + root) / (2.0 * a)}) {
    if (s <= kMinDistance) continue;
    const double z = o.z() + s * d.z();
    if (z >= c.z_min && z <= c.z_max) return s;
  }
  return std::nullopt;
}

std::optional<double> IntersectBox(const Box& box, const Eigen::Vector3d& o,
                                   const Eigen::Vector3d& d) {
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  const Eigen::Vector2d rel = o.head<2>() - box.center;
  const Eigen::Vector3d lo(c * rel.x() + s * rel.y(), -s * rel.x() + c * rel.y(),
                           o.z());
  const Eigen::Vector3d ld(c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z());
  const Eigen::Vector3d min(-0.5 * box.size.x(), -0.5 * box.size.y(), 0.0);
  const Eigen::Vector3d max(0.5 * box.size.x(), 0.5 * box.size.y(), box.size.z());
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (std::abs(ld(i)) < 1e-15) {
      if (lo(i) < min(i) || lo(i) > max(i)) return std::nullopt;
      continue;
    }
    double t0 = (min(i) - lo(i)) / ld(i);
    double t1 = (max(i) - lo(i)) / ld(i);
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_far < t_near) return std::nullopt;
  if (t_near > kMinDistance) return t_near;
  if (t_far > kMinDistance) return t_far;
  return std::nullopt;
}

double WallDistance(const Wall& w, const Eigen::Vector3d& p) {
  const Eigen::Vector2d u = Dir(w.yaw);
  const Eigen::Vector2d n(-u.y(), u.x());
  const Eigen::Vector2d rel = p.head<2>() - w.center;
  const double along = std::max(0.0, std::abs(u.dot(rel)) - 0.5 * w.length);
  const double vertical =
      std::max({0.0, w.z_min - p.z(), p.z() - w.z_max});
  return std::sqrt(along * along + vertical * vertical + std::pow(n.dot(rel), 2));
}

double CylinderDistance(const Cylinder& c, const Eigen::Vector3d& p) {
  const double radial = (p.head<2>() - c.center).norm() - c.radius;
  const double vertical = std::max({0.0, c.z_min - p.z(), p.z() - c.z_max});
  return std::hypot(radial, vertical);
}

double BoxDistance(const Box& box, const Eigen::Vector3d& p) {
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  const Eigen::Vector2d rel = p.head<2>() - box.center;
  const Eigen::Vector3d half = 0.5 * box.size;
  const Eigen::Vector3d local(c * rel.x() + s * rel.y(), -s * rel.x() + c * rel.y(),
                              p.z() - half.z());
  const Eigen::Vector3d q = local.cwiseAbs() - half;
  const double outside = q.cwiseMax(0.0).norm();
  const double inside = std::min(q.maxCoeff(), 0.0);
  return std::abs(outside + inside);
}

double GroundDistance(const World& world, const Eigen::Vector3d& p) {
  const double dx = std::max(0.0, std::abs(p.x()) - world.ground_extent);
  const double dy = std::max(0.0, std::abs(p.y()) - world.ground_extent);
  return std::sqrt(dx * dx + dy * dy + p.z() * p.z());
}

int Steps(double length, double spacing) {
  return std::max(1, static_cast<int>(std::ceil(length / spacing)));
}

void SampleWall(const Wall& w, double spacing, std::vector<LabeledPoint>& out) {
  const Eigen::Vector2d u = Dir(w.yaw);
  const int nu = Steps(w.length, spacing);
  const int nz = Steps(w.z_max - w.z_min, spacing);
  for (int i = 0; i <= nu; ++i) {
    const Eigen::Vector2d xy = w.center + (-0.5 + double(i) / nu) * w.length * u;
    for (int k = 0; k <= nz; ++k) {
      const double z = w.z_min + (w.z_max - w.z_min) * k / nz;
      out.push_back({Eigen::Vector3d(xy.x(), xy.y(), z), w.label});
    }
  }
}

void SampleCylinder(const Cylinder& c, double spacing,
                    std::vector<LabeledPoint>& out) {
  const int na = std::max(8, Steps(2.0 * std::numbers::pi * c.radius, spacing));
  const int nz = Steps(c.z_max - c.z_min, spacing);
  for (int i = 0; i < na; ++i) {
    const Eigen::Vector2d xy =
        c.center + c.radius * Dir(2.0 * std::numbers::pi * i / na);
    for (int k = 0; k <= nz; ++k) {
      const double z = c.z_min + (c.z_max - c.z_min) * k / nz;
      out.push_back({Eigen::Vector3d(xy.x(), xy.y(), z), c.label});
    }
  }
}

void SampleBox(const Box& box, double spacing, std::vector<LabeledPoint>& out) {
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  auto emit = [&](const Eigen::Vector3d& local) {
    const Eigen::Vector2d xy(c * local.x() - s * local.y(),
                             s * local.x() + c * local.y());
    out.push_back({Eigen::Vector3d(box.center.x() + xy.x(),
                                   box.center.y() + xy.y(), local.z()),
                   box.label});
  };
  const Eigen::Vector3d half = 0.5 * box.size;
  const int nx = Steps(box.size.x(), spacing);
  const int ny = Steps(box.size.y(), spacing);
  const int nz = Steps(box.size.z(), spacing);
  auto lerp = [](double a, double b, int i, int n) { return a + (b - a) * i / n; };
  for (int i = 0; i <= nx; ++i) {
    const double x = lerp(-half.x(), half.x(), i, nx);
    for (int k = 0; k <= nz; ++k) {
      const double z = lerp(0.0, box.size.z(), k, nz);
      emit({x, -half.y(), z});
      emit({x, half.y(), z});
    }
    for (int j = 0; j <= ny; ++j) emit({x, lerp(-half.y(), half.y(), j, ny), box.size.z()});
  }
  for (int j = 0; j <= ny; ++j) {
    const double y = lerp(-half.y(), half.y(), j, ny);
    for (int k = 0; k <= nz; ++k) {
      const double z = lerp(0.0, box.size.z(), k, nz);
      emit({-half.x(), y, z});
      emit({half.x(), y, z});
    }
  }
}

}  // namespace

std::optional<RayHit> CastRay(const World& world, const Eigen::Vector3d& origin,
                              const Eigen::Vector3d& direction,
                              double max_distance) {
  std::optional<RayHit> best;
  if (world.has_ground && std::abs(direction.z()) > 1e-15) {
    const double s = -origin.z() / direction.z();
    if (s > kMinDistance) {
      const Eigen::Vector3d p = origin + s * direction;
      if (std::abs(p.x()) <= world.ground_extent &&
          std::abs(p.y()) <= world.ground_extent) {
        Consider(best, s, world.ground_label);
      }
    }
  }
  for (const auto& w : world.walls) {
    if (auto s = IntersectWall(w, origin, direction)) Consider(best, *s, w.label);
  }
  for (const auto& c : world.cylinders) {
    if (auto s = IntersectCylinder(c, origin, direction)) Consider(best, *s, c.label);
  }
  for (const auto& b : world.boxes) {
    if (auto s = IntersectBox(b, origin, direction)) Consider(best, *s, b.label);
  }
  if (best && best->distance > max_distance) return std::nullopt;
  return best;
}

double SurfaceDistance(const World& world, const Eigen::Vector3d& point) {
  double d = std::numeric_limits<double>::infinity();
  if (world.has_ground) d = GroundDistance(world, point);
  for (const auto& w : world.walls) d = std::min(d, WallDistance(w, point));
  for (const auto& c : world.cylinders) d = std::min(d, CylinderDistance(c, point));
  for (const auto& b : world.boxes) d = std::min(d, BoxDistance(b, point));
  return d;
}

World GenerateWorld(std::uint64_t seed, const WorldSpec& spec, double extent) {
  if (!(extent > 0.0)) throw ConfigError("world extent must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-extent, extent);
  std::uniform_real_distribution<double> yaw(0.0, std::numbers::pi);
  World world;
  world.ground_extent = extent;
  for (int i = 0; i < spec.walls; ++i) {
    Wall w;
    w.center = {pos(rng), pos(rng)};
    w.yaw = yaw(rng);
    w.length = std::uniform_real_distribution<double>(5.0, 20.0)(rng);
    w.z_max = std::uniform_real_distribution<double>(3.0, 8.0)(rng);
    world.walls.push_back(w);
  }
  for (int i = 0; i < spec.poles; ++i) {
    Cylinder c;
    c.center = {pos(rng), pos(rng)};
    world.cylinders.push_back(c);
  }
  for (int i = 0; i < spec.signs; ++i) {
    Wall w;
    w.center = {pos(rng), pos(rng)};
    w.yaw = yaw(rng);
    w.length = 0.7;
    w.z_min = 2.0;
    w.z_max = 2.6;
    w.label = kitti_labels::kTrafficSign;
    world.walls.push_back(w);
  }
  for (int i = 0; i < spec.parked_cars + spec.dynamic_cars; ++i) {
    Box b;
    b.center = {pos(rng), pos(rng)};
    b.yaw = yaw(rng);
    b.label = i < spec.parked_cars ? kitti_labels::kCar : kitti_labels::kMovingCar;
    world.boxes.push_back(b);
  }
  return world;
}

std::vector<LabeledPoint> SampleWorld(const World& world, double spacing) {
  if (!(spacing > 0.0)) throw ConfigError("sample spacing must be positive");
  std::vector<LabeledPoint> out;
  if (world.has_ground) {
    const int n = Steps(2.0 * world.ground_extent, spacing);
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) {
        out.push_back({Eigen::Vector3d(-world.ground_extent + 2.0 * world.ground_extent * i / n,
                                       -world.ground_extent + 2.0 * world.ground_extent * j / n,
                                       0.0),
                       world.ground_label});
      }
    }
  }
  for (const auto& w : world.walls) SampleWall(w, spacing, out);
  for (const auto& c : world.cylinders) SampleCylinder(c, spacing, out);
  for (const auto& b : world.boxes) SampleBox(b, spacing, out);
  return out;
}

World MakeStructuredWorld() {
  World world;
  world.ground_extent = 15.0;
  world.walls.push_back({{0.0, 12.0}, 0.0, 24.0, 0.0, 5.0, kitti_labels::kBuilding});
  world.walls.push_back({{-12.0, 0.0}, std::numbers::pi / 2, 24.0, 0.0, 5.0,
                         kitti_labels::kBuilding});
  world.walls.push_back({{9.0, -7.0}, 0.6, 12.0, 0.0, 4.0, kitti_labels::kBuilding});
  for (const Eigen::Vector2d& c : {Eigen::Vector2d(3.0, 4.0), Eigen::Vector2d(-5.0, -6.0),
                                  Eigen::Vector2d(7.0, 2.0), Eigen::Vector2d(-2.0, 8.0)}) {
    world.cylinders.push_back({c, 0.15, 0.0, 4.0, kitti_labels::kPole});
  }
  return world;
}

std::vector<LabeledPoint> MakeStructuredScene(std::uint64_t seed, double spacing) {
  const World world = MakeStructuredWorld();
  auto points = SampleWorld(world, spacing);
  // Jitter within each surface so repeated samples are not lattice aligned.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.5 * spacing, 0.5 * spacing);
  for (auto& p : points) {
    const Eigen::Vector3d before = p.position;
    for (int attempt = 0; attempt < 4; ++attempt) {
      Eigen::Vector3d candidate = before;
      if (std::abs(before.z()) < 1e-12) {
        candidate.x() += jitter(rng);
        candidate.y() += jitter(rng);
      } else {
        candidate.z() += jitter(rng);
      }
      if (SurfaceDistance(world, candidate) < 1e-9) {
        p.position = candidate;
        break;
      }
    }
  }
  return points;
}

World MakeLoopWorld(std::uint64_t seed, double side, double corner_radius) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
  };
  const double half = 0.5 * side;
  World world;
  world.ground_extent = half + 40.0;

  for (int k = 0; k < 4; ++k) {
    // Side k runs counter-clockwise; normal points to the square's center.
    const double heading = 0.5 * std::numbers::pi * k;
    const Eigen::Vector2d dir = Dir(heading);
    const Eigen::Vector2d normal(-dir.y(), dir.x());
    const Eigen::Vector2d middle = -half * normal;
    auto at = [&](double along, double lateral) -> Eigen::Vector2d {
      return middle + along * dir + lateral * normal;
    };
    const double a_min = -half + corner_radius;
    const double a_max = half - corner_radius;

    for (const double sgn : {1.0, -1.0}) {
      // Buildings: closed rectangular footprints set back from the road.
      double a = a_min + uniform(0.0, 5.0);
      while (true) {
        const double width = uniform(8.0, 16.0);
        if (a + width > a_max) break;
        const double setback = uniform(9.0, 12.0);
        const double depth = uniform(6.0, 10.0);
        const double height = uniform(4.0, 9.0);
        const double l0 = sgn * setback, l1 = sgn * (setback + depth);
        const Eigen::Vector2d c00 = at(a, l0), c10 = at(a + width, l0);
        const Eigen::Vector2d c01 = at(a, l1), c11 = at(a + width, l1);
        auto wall = [&](const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
          const Eigen::Vector2d d = q - p;
          world.walls.push_back({0.5 * (p + q), std::atan2(d.y(), d.x()), d.norm(),
                                 0.0, height, kitti_labels::kBuilding});
        };
        wall(c00, c10);
        wall(c01, c11);
        wall(c00, c01);
        wall(c10, c11);
        a += width + uniform(3.0, 10.0);
      }

      // Poles, some carrying a sign panel.
      a = a_min + uniform(0.0, 8.0);
      while (a < a_max) {
        const double lateral = sgn * uniform(4.5, 6.0);
        world.cylinders.push_back({at(a, lateral), 0.12, 0.0, 5.0, kitti_labels::kPole});
        if (uniform(0.0, 1.0) < 0.3) {
          world.walls.push_back({at(a + 0.4, lateral), heading + 0.5 * std::numbers::pi,
                                 0.7, 2.2, 2.8, kitti_labels::kTrafficSign});
        }
        a += uniform(8.0, 16.0);
      }

      // Parked cars.
      for (a = a_min + 2.5; a + 2.5 < a_max; a += 10.0) {
        if (uniform(0.0, 1.0) < 0.3) {
          world.boxes.push_back({at(a + uniform(0.0, 5.0), sgn * 3.2), heading,
                                 Eigen::Vector3d(4.2, 1.8, 1.5), kitti_labels::kCar});
        }
      }
    }
  }
  return world;
}

}  // namespace semslam::simgen
