#include "semslam/simgen/simulator.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <thread>

#include "semslam/io/kitti_io.h"

namespace semslam::simgen {
namespace {

// Labels a flipped point may take; the true label is skipped.
constexpr Label kFlipLabels[] = {kitti_labels::kRoad, kitti_labels::kBuilding,
                                 kitti_labels::kPole, kitti_labels::kTrafficSign,
                                 kitti_labels::kCar, kitti_labels::kVegetation};

struct PathPoint {
  Eigen::Vector2d position;
  double heading;
};

// Rounded square of half-size h, corner radius r, starting at (0, -h)
// heading +x, counter-clockwise.
PathPoint RoundedSquareAt(double s, double h, double r) {
  const double straight = 2.0 * (h - r);
  const double arc = 0.5 * std::numbers::pi * r;
  const double quarter = straight + arc;
  const double perimeter = 4.0 * quarter;
  s = std::fmod(s, perimeter);
  if (s < 0.0) s += perimeter;
  // First half straight of the bottom side, then repeated (arc, straight)
  // quarters, finishing with the second half of the bottom straight.
  double local = s + 0.5 * straight;
  int side = static_cast<int>(std::floor(local / quarter));
  local -= side * quarter;
  side %= 4;
  const double heading = 0.5 * std::numbers::pi * side;
  const Eigen::Vector2d dir(std::cos(heading), std::sin(heading));
  const Eigen::Vector2d normal(-dir.y(), dir.x());
  const Eigen::Vector2d start = -h * normal - (h - r) * dir;
  if (local <= straight) return {start + local * dir, heading};
  const double phi = (local - straight) / std::max(r, 1e-12);
  const Eigen::Vector2d center = start + straight * dir + r * normal;
  const double angle = heading - 0.5 * std::numbers::pi + phi;
  return {center + r * Eigen::Vector2d(std::cos(angle), std::sin(angle)),
          heading + phi};
}

// Primitives that a ray of length radius from center could reach.
World CullWorld(const World& world, const Eigen::Vector2d& center, double radius) {
  World out;
  out.has_ground = world.has_ground;
  out.ground_extent = world.ground_extent;
  out.ground_label = world.ground_label;
  for (const auto& w : world.walls) {
    if ((w.center - center).norm() <= radius + 0.5 * w.length) out.walls.push_back(w);
  }
  for (const auto& c : world.cylinders) {
    if ((c.center - center).norm() <= radius + c.radius) out.cylinders.push_back(c);
  }
  for (const auto& b : world.boxes) {
    if ((b.center - center).norm() <= radius + 0.5 * b.size.head<2>().norm()) {
      out.boxes.push_back(b);
    }
  }
  return out;
}

}  // namespace

Scan SimulateScan(const World& world, const Pose3& pose, const SensorModel& model,
                  const ScanNoise& noise, std::uint64_t seed,
                  const std::optional<Twist6>& sweep_motion) {
  if (model.channels < 1 || model.azimuth_steps < 1) {
    throw ConfigError("sensor model needs at least one channel and azimuth step");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> range_noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, std::size(kFlipLabels) - 2);

  // Sensor positions over the sweep stay within |translation| of the end pose.
  const double travel = sweep_motion ? sweep_motion->translation.norm() : 0.0;
  const World local = CullWorld(world, pose.translation().head<2>(),
                                model.max_range + travel + 1.0);

  Scan scan;
  const double confidence = 1.0 - noise.label_flip;
  for (int m = 0; m < model.azimuth_steps; ++m) {
    const double t = (m + 0.5) / model.azimuth_steps;
    const double azimuth = std::numbers::pi * (1.0 - 2.0 * t);
    const Pose3 sensor =
        sweep_motion ? pose * Se3Exp(*sweep_motion * (t - 1.0)) : pose;
    for (int c = 0; c < model.channels; ++c) {
      const double elevation =
          model.channels == 1
              ? 0.5 * (model.min_elevation + model.max_elevation)
              : model.min_elevation + (model.max_elevation - model.min_elevation) *
                                          c / (model.channels - 1);
      const Eigen::Vector3d dir(std::cos(elevation) * std::cos(azimuth),
                                std::cos(elevation) * std::sin(azimuth),
                                std::sin(elevation));
      const auto hit = CastRay(local, sensor.translation(),
                               sensor.rotation() * dir, model.max_range);
      if (!hit) continue;
      double range = hit->distance;
      if (noise.range_sigma > 0.0) range += noise.range_sigma * range_noise(rng);
      LabeledPoint p;
      p.position = range * dir;
      p.label = hit->label;
      p.confidence = confidence;
      p.time_offset = t;
      if (noise.label_flip > 0.0 && unit(rng) < noise.label_flip) {
        int k = pick(rng);
        if (kFlipLabels[k] == p.label) k = std::size(kFlipLabels) - 1;
        p.label = kFlipLabels[k];
      }
      scan.points.push_back(p);
    }
  }
  return scan;
}

LoopTrajectory GenerateLoopTrajectory(double side, int scans_per_side,
                                      const Twist6& drift, double corner_radius,
                                      double sensor_height) {
  if (!(side > 0.0) || scans_per_side < 1) {
    throw ConfigError("loop needs a positive side and at least one scan per side");
  }
  const double h = 0.5 * side;
  const double r = std::clamp(corner_radius, 0.0, h);
  const double perimeter = 4.0 * (2.0 * (h - r) + 0.5 * std::numbers::pi * r);
  const int n = 4 * scans_per_side;
  LoopTrajectory out;
  out.truth.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double s = n == 1 ? 0.0 : perimeter * k / (n - 1);
    const PathPoint p = k == n - 1 ? RoundedSquareAt(0.0, h, r)
                                   : RoundedSquareAt(s, h, r);
    out.truth.push_back(Pose3::FromYaw(
        p.heading, Eigen::Vector3d(p.position.x(), p.position.y(), sensor_height)));
  }
  out.odometry = InjectDrift(out.truth, drift);
  return out;
}

std::vector<Pose3> InjectDrift(const std::vector<Pose3>& trajectory,
                               const Twist6& drift) {
  std::vector<Pose3> out;
  out.reserve(trajectory.size());
  const Pose3 bias = Se3Exp(drift);
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    if (k == 0) {
      out.push_back(trajectory[0]);
      continue;
    }
    const Pose3 relative = trajectory[k - 1].inverse() * trajectory[k];
    out.push_back(out.back() * relative * bias);
  }
  return out;
}

void WriteKittiSequence(const std::vector<Scan>& scans,
                        const std::vector<Pose3>& poses,
                        const std::filesystem::path& dir) {
  if (scans.size() != poses.size()) throw Error("scan/pose count mismatch");
  std::filesystem::create_directories(dir / "velodyne");
  std::filesystem::create_directories(dir / "labels");
  for (std::size_t i = 0; i < scans.size(); ++i) {
    std::ostringstream name;
    name << std::setw(6) << std::setfill('0') << i;
    io::WriteScan(scans[i], dir / "velodyne" / (name.str() + ".bin"),
                  dir / "labels" / (name.str() + ".label"));
  }
  io::WritePosesKitti(poses, dir / "poses.txt");
  std::ofstream calib(dir / "calib.txt");
  if (!calib) throw Error("cannot write " + (dir / "calib.txt").string());
  calib << "Tr: 1 0 0 0 0 1 0 0 0 0 1 0\n";
}

SyntheticSequence MakeLoopSequence(const LoopPreset& preset) {
  const World world = MakeLoopWorld(preset.seed, preset.side, preset.corner_radius);
  SyntheticSequence out;
  out.truth = GenerateLoopTrajectory(preset.side, preset.scans_per_side, Twist6{},
                                     preset.corner_radius)
                  .truth;
  const std::size_t n = out.truth.size();
  out.scans.resize(n);
  auto simulate = [&](std::size_t k) {
    std::optional<Twist6> motion;
    if (preset.sweep_motion && n > 1) {
      const std::size_t a = k == 0 ? 0 : k - 1;
      motion = Se3Log(out.truth[a].inverse() * out.truth[a + 1]);
    }
    out.scans[k] = SimulateScan(world, out.truth[k], preset.sensor, preset.noise,
                                preset.seed + k + 1, motion);
    out.scans[k].index = static_cast<std::int64_t>(k);
  };
  int workers = preset.threads > 0
                    ? preset.threads
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = static_cast<int>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t k = w; k < n; k += workers) simulate(k);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace semslam::simgen
