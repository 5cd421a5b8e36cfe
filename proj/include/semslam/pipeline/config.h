#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>

#include "semslam/core/pose.h"
#include "semslam/core/types.h"
#include "semslam/loop_closure/loop_closure.h"
#include "semslam/loop_closure/pose_graph.h"
#include "semslam/registration/registration.h"
#include "semslam/submaps/submap.h"

namespace semslam::pipeline {

struct PipelineConfig {
  // Odometry.
  double voxel_size = 1.0;
  int max_points_per_voxel = 20;
  double registration_voxel_factor = 1.5;
  double initial_threshold = 2.0;
  double min_motion = 0.1;
  double max_range = 100.0;
  bool deskew = true;
  registration::RegistrationOptions registration;
  SemanticConfig semantic = SemanticConfig::Default();

  // Submaps: each covers submap_scans scans, a new one starts every half.
  submaps::SubmapOptions submap;
  int submap_scans = 20;

  // Loop closure and optimization.
  loop_closure::LoopClosureOptions loop;
  // Every n-th node is used as a loop-closure query.
  int loop_node_stride = 5;
  // Labels left out of node matching scans (flat ground).
  std::set<Label> loop_match_exclude = {
      kitti_labels::kRoad, kitti_labels::kParking, kitti_labels::kSidewalk,
      49 /* other-ground */, kitti_labels::kTerrain};
  // Label-agnostic voxel thinning of node matching scans.
  double loop_match_voxel = 0.5;
  // Scans between submitting a loop search batch and applying its results.
  int loop_apply_delay = 10;
  loop_closure::OptimizerOptions optimizer;

  // Output.
  double export_voxel = 0.05;
  std::set<Label> export_exclude;
  bool export_map = true;
  double scan_period = 0.1;

  // Constant per-scan bias composed onto odometry (synthetic drift studies).
  Twist6 inject_drift;

  // Loop search workers; -1 = hardware concurrency, 0 = inline.
  int threads = -1;

  // Throws ConfigError naming the offending key.
  void Set(std::string_view key, std::string_view value);
  void Validate() const;

  // Flat "key = value" text; '#' starts a comment.
  static PipelineConfig Parse(std::string_view text);
  static PipelineConfig FromFile(const std::filesystem::path& path);
  std::string ToString() const;
};

// Worker count after applying the SEMSLAM_THREADS cap.
int EffectiveThreads(const PipelineConfig& config);

}  // namespace semslam::pipeline
