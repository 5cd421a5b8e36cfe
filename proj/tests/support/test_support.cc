#include "support/test_support.h"

#include <atomic>
#include <fstream>
#include <numbers>

#include <unistd.h>

#include "semslam/preprocessing/preprocessing.h"
#include "semslam/simgen/simulator.h"
#include "semslam/simgen/world.h"

namespace semslam::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("semslam_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Eigen::Vector3d RandomUnitVector(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d v;
  do {
    v = Eigen::Vector3d(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

Twist6 RandomTwist(std::mt19937_64& rng, double max_angle, double max_translation) {
  std::uniform_real_distribution<double> angle(0.0, max_angle);
  std::uniform_real_distribution<double> t(-max_translation, max_translation);
  return Twist6(RandomUnitVector(rng) * angle(rng),
                Eigen::Vector3d(t(rng), t(rng), t(rng)));
}

Pose3 RandomPose(std::mt19937_64& rng, double max_angle, double max_translation) {
  std::uniform_real_distribution<double> angle(0.0, max_angle);
  std::uniform_real_distribution<double> t(-max_translation, max_translation);
  const Eigen::AngleAxisd aa(angle(rng), RandomUnitVector(rng));
  return Pose3(Eigen::Quaterniond(aa), Eigen::Vector3d(t(rng), t(rng), t(rng)));
}

std::vector<LabeledPoint> RandomPoints(std::mt19937_64& rng, std::size_t count,
                                       double extent, const std::vector<Label>& labels) {
  std::uniform_real_distribution<double> u(-extent, extent);
  std::uniform_int_distribution<std::size_t> pick(0, labels.size() - 1);
  std::vector<LabeledPoint> out(count);
  for (auto& p : out) {
    p.position = Eigen::Vector3d(u(rng), u(rng), u(rng));
    p.label = labels[pick(rng)];
  }
  return out;
}

Scan MakeScan(std::vector<LabeledPoint> points, std::int64_t index) {
  Scan scan;
  scan.points = std::move(points);
  scan.index = index;
  return scan;
}

double RotationErrorDeg(const Pose3& a, const Pose3& b) {
  return (a.inverse() * b).Angle() * 180.0 / std::numbers::pi;
}

double TranslationError(const Pose3& a, const Pose3& b) {
  return (a.translation() - b.translation()).norm();
}

std::vector<char> ReadBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteBytes(const fs::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

RegistrationInstance MakeSceneInstance(std::uint64_t seed, const Pose3& truth,
                                       const InstanceOptions& options) {
  std::mt19937_64 rng(seed);
  RegistrationInstance out;
  out.truth = truth;
  out.target = simgen::MakeStructuredScene(seed, options.spacing);
  const Pose3 sensor_from_world = truth.inverse();
  std::normal_distribution<double> noise(0.0, 1.0);
  for (const auto& p : out.target) {
    LabeledPoint s = p;
    s.position = sensor_from_world * p.position;
    if (options.noise_sigma > 0.0) {
      s.position += options.noise_sigma * Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
    }
    out.source.points.push_back(s);
  }
  std::vector<LabeledPoint> wall;
  for (const auto& p : out.target) {
    if (p.label == kitti_labels::kBuilding && p.position.y() > 11.5) wall.push_back(p);
  }
  out.distractors =
      static_cast<std::size_t>(options.distractor_fraction * out.target.size());
  if (!wall.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, wall.size() - 1);
    std::uniform_real_distribution<double> slide(-0.1, 0.1);
    for (std::size_t i = 0; i < out.distractors; ++i) {
      LabeledPoint g = wall[pick(rng)];
      g.position += Eigen::Vector3d(slide(rng), -options.distractor_offset, slide(rng));
      g.label = kitti_labels::kCar;
      g.confidence = 0.95;
      g.position = sensor_from_world * g.position;
      out.source.points.push_back(g);
    }
  }
  return out;
}

local_map::SemanticVoxelMap TargetMap(const std::vector<LabeledPoint>& target,
                                      const SemanticConfig& cfg) {
  local_map::SemanticVoxelMap map(0.5, 100000, 1000.0, cfg);
  for (const auto& p : target) map.InsertPoint(p);
  return map;
}

MatchProblem MakeMatchProblem(std::uint64_t seed, const loop_closure::Se2& truth) {
  simgen::WorldSpec spec;
  spec.walls = 8;
  spec.poles = 12;
  spec.signs = 4;
  spec.parked_cars = 4;
  const auto world = simgen::GenerateWorld(seed, spec, 25.0);
  const simgen::SensorModel sensor{32, 720, -15.0 * std::numbers::pi / 180.0,
                                   15.0 * std::numbers::pi / 180.0, 40.0};
  constexpr double kHeight = 1.73;

  MatchProblem out;
  out.truth = truth;
  out.submap = std::make_shared<submaps::Submap>(Pose3::Identity());
  for (int s = 0; s < 5; ++s) {
    const Pose3 pose = Pose3::FromYaw(0.02 * s, {-2.0 + s, 0.0, kHeight});
    Scan scan = simgen::SimulateScan(world, pose, sensor, {}, seed * 31 + s);
    scan.index = s;
    out.submap->InsertScan(scan, pose);
  }
  out.submap->Finalize();

  const Pose3 query_pose = truth.ToPose3(kHeight);
  Scan query = simgen::SimulateScan(world, query_pose, sensor, {}, seed * 31 + 17);
  std::erase_if(query.points,
                [](const LabeledPoint& p) { return p.label == kitti_labels::kRoad; });
  query = preprocessing::AdaptiveVoxelDownsample(query, 0.5, 1, SemanticConfig{});
  out.scan = loop_closure::ProjectScan(query, query_pose, out.submap->options());
  return out;
}

}  // namespace semslam::testing
