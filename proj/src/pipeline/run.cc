#include "semslam/pipeline/run.h"

#include <cstdio>
#include <fstream>

#include "semslam/map_post/map_export.h"
#include "semslam/pipeline/backend.h"
#include "semslam/pipeline/odometry.h"
#include "semslam/preprocessing/preprocessing.h"

namespace semslam::pipeline {

namespace fs = std::filesystem;

Mode ParseMode(std::string_view text) {
  if (text == "odometry") return Mode::kOdometry;
  if (text == "slam") return Mode::kSlam;
  throw ConfigError("unknown mode '" + std::string(text) + "'");
}

RunResult RunSequence(std::size_t count, const ScanLoader& load,
                      const PipelineConfig& config, Mode mode) {
  config.Validate();
  Odometry odometry(config);
  MappingBackend backend(config, mode == Mode::kSlam);
  const bool drift = !config.inject_drift.AsVector().isZero(0.0);
  const Pose3 bias = Se3Exp(config.inject_drift);

  RunResult result;
  for (std::size_t i = 0; i < count; ++i) {
    Scan scan = load(i);
    scan.index = static_cast<std::int64_t>(i);
    const auto step = odometry.ProcessScan(scan);
    Pose3 pose = step.pose;
    if (drift && i > 0) {
      const auto& icp = odometry.poses();
      pose = result.odometry.back() * (icp[i - 1].inverse() * icp[i]) * bias;
    }
    result.odometry.push_back(pose);
    result.degraded.push_back(step.degraded);
    backend.AddScan(scan.index, pose, step.frame);
  }
  backend.Finish();

  result.trajectory = backend.Trajectory();
  result.graph = backend.graph();
  result.submaps = backend.Submaps();
  result.loop_constraints = backend.loop_constraints();
  result.first_loop_scan = backend.first_loop_scan();
  return result;
}

RunResult RunSequence(const std::vector<Scan>& scans,
                      const PipelineConfig& config, Mode mode) {
  return RunSequence(
      scans.size(), [&scans](std::size_t i) { return scans[i]; }, config, mode);
}

std::vector<double> SequenceTimestamps(const io::SequencePaths& paths,
                                       std::size_t count, double scan_period) {
  std::vector<double> out;
  const fs::path times = paths.velodyne_dir.parent_path() / "times.txt";
  if (fs::exists(times)) {
    std::ifstream in(times);
    double t;
    while (out.size() < count && in >> t) out.push_back(t);
  }
  if (out.size() != count) {
    out.clear();
    for (std::size_t i = 0; i < count; ++i) out.push_back(i * scan_period);
  }
  return out;
}

RunResult RunKittiSequence(const io::SequencePaths& paths,
                           const PipelineConfig& config, Mode mode,
                           const fs::path& out_dir) {
  if (!fs::is_directory(paths.velodyne_dir)) {
    throw Error("missing velodyne directory " + paths.velodyne_dir.string());
  }
  const std::size_t count = paths.ScanCount();
  auto load = [&paths, &config](std::size_t i) {
    Scan scan = io::ReadScan(paths.ScanPath(i), paths.LabelPath(i));
    scan.index = static_cast<std::int64_t>(i);
    scan.duration = config.scan_period;
    return scan;
  };
  RunResult result = RunSequence(count, load, config, mode);

  fs::create_directories(out_dir);
  std::vector<Pose3> frame_poses = result.trajectory;
  if (paths.calib_file) {
    frame_poses = io::ToCameraFrame(result.trajectory,
                                    io::ReadVeloToCamera(*paths.calib_file));
  }
  io::WritePosesKitti(frame_poses, out_dir / "poses_kitti.txt");
  io::WritePosesTum(frame_poses, SequenceTimestamps(paths, count, config.scan_period),
                    out_dir / "poses_tum.txt");
  loop_closure::WritePoseGraph(result.graph, out_dir / "pose_graph.txt");

  const fs::path submap_dir = out_dir / "submaps";
  fs::create_directories(submap_dir);
  for (std::size_t s = 0; s < result.submaps.size(); ++s) {
    char name[16];
    std::snprintf(name, sizeof(name), "%04zu", s);
    submaps::WriteSubmap(*result.submaps[s], submap_dir / (std::string(name) + ".smap"));
    submaps::WriteDominantLabelImage(result.submaps[s]->grid(),
                                     submap_dir / (std::string(name) + ".ppm"));
  }

  if (config.export_map) {
    std::set<Label> exclude = config.semantic.dynamic_labels;
    exclude.insert(config.export_exclude.begin(), config.export_exclude.end());
    map_post::MapAggregator aggregator(config.export_voxel, exclude);
    for (std::size_t i = 0; i < count; ++i) {
      Scan scan = load(i);
      if (config.deskew && i > 0) {
        scan = preprocessing::Deskew(
            scan, result.trajectory[i - 1].inverse() * result.trajectory[i]);
      }
      aggregator.Add(scan, result.trajectory[i]);
    }
    map_post::ExportPly(aggregator.points(), out_dir / "map.ply",
                        map_post::PlyFormat::kBinary);
  }
  return result;
}

}  // namespace semslam::pipeline
