#pragma once

#include <cstdint>
#include <deque>
#include <future>
#include <memory>
#include <optional>
#include <vector>

#include "semslam/core/pose.h"
#include "semslam/core/types.h"
#include "semslam/loop_closure/loop_closure.h"
#include "semslam/loop_closure/pose_graph.h"
#include "semslam/pipeline/config.h"
#include "semslam/pipeline/thread_pool.h"
#include "semslam/submaps/submap.h"

namespace semslam::pipeline {

// Submaps, pose graph and asynchronous loop closure. Loop searches submitted
// while adding node n are applied, in submission order, when node
// n + loop_apply_delay is added (or at Finish), so results do not depend on
// worker timing.
class MappingBackend {
 public:
  MappingBackend(const PipelineConfig& config, bool loop_closure);
  ~MappingBackend();

  MappingBackend(const MappingBackend&) = delete;
  MappingBackend& operator=(const MappingBackend&) = delete;

  // frame (sensor frame, downsampled) goes into the active submaps and, on
  // query nodes, becomes the loop closure scan.
  void AddScan(std::int64_t scan_index, const Pose3& odometry_pose, const Scan& frame);

  // Finalizes the open submaps, drains pending searches and runs the final
  // optimization.
  void Finish();

  // Odometry poses until the first optimization, graph poses afterwards.
  std::vector<Pose3> Trajectory() const;

  const loop_closure::PoseGraph& graph() const { return graph_; }
  std::vector<std::shared_ptr<const submaps::Submap>> Submaps() const;
  int loop_constraints() const {
    return graph_.CountConstraints(loop_closure::ConstraintKind::kLoop);
  }
  // Scan index at which loop constraints were first applied, -1 if never.
  std::int64_t first_loop_scan() const { return first_loop_scan_; }
  int optimizations() const { return optimizations_; }

 private:
  struct Batch {
    int apply_at = 0;
    std::vector<std::future<std::optional<loop_closure::Constraint>>> results;
  };

  void FinishSubmap(int index);
  void Submit(const loop_closure::VertexId& target);
  void ApplyBatches(bool drain);
  void Optimize();

  PipelineConfig config_;
  bool loop_enabled_;
  loop_closure::PoseGraph graph_;
  loop_closure::LoopClosure loop_;
  std::vector<std::shared_ptr<submaps::Submap>> submaps_;
  std::vector<int> active_;
  std::deque<Batch> pending_;
  std::int64_t last_scan_index_ = -1;
  std::int64_t first_loop_scan_ = -1;
  int optimizations_ = 0;
  bool finished_ = false;
  // Declared last so workers stop before the state they reference.
  std::unique_ptr<ThreadPool> pool_;
};

}  // namespace semslam::pipeline
