#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "semslam/loop_closure/max_grid_pyramid.h"
#include "semslam/loop_closure/pose_graph.h"
#include "semslam/loop_closure/scan_matcher.h"
#include "semslam/submaps/submap.h"

namespace semslam::loop_closure {

struct LoopClosureOptions {
  double search_radius = 50.0;
  SearchWindow window;
  double min_score = 0.55;
  int pyramid_depth = 7;
  // Nodes whose scan index lies within this many scans of a submap's scan
  // range count as odometry-adjacent to it.
  int min_scan_gap = 10;
  // Pyramids kept in memory at once.
  int pyramid_cache_size = 8;
  ConstraintWeights weights;
};

struct LoopSearchTask {
  int submap = 0;
  int node = 0;
  // Current estimate of submap^-1 * node.
  Se2 initial_relative;
  std::shared_ptr<const submaps::Submap> submap_data;
  std::shared_ptr<const Scan2D> scan;
};

// Node scan in the node's gravity-aligned frame.
Scan2D ProjectScan(const Scan& scan, const Pose3& pose,
                   const submaps::SubmapOptions& options);

// Candidate generation and matching between trajectory nodes and finished
// submaps. Submap and node indices match the pose graph.
class LoopClosure {
 public:
  explicit LoopClosure(const LoopClosureOptions& options = {});

  const LoopClosureOptions& options() const { return options_; }

  void SetSubmap(int index, std::shared_ptr<const submaps::Submap> submap);
  void SetNodeScan(int node, std::int64_t scan_index, Scan2D scan);

  // Unsearched pairs involving target; marks them searched.
  std::vector<LoopSearchTask> Candidates(const PoseGraph& graph,
                                         const VertexId& target);

  // Safe to call concurrently with everything except SetSubmap on the same
  // index.
  std::optional<Constraint> Search(const LoopSearchTask& task) const;

  // Candidates + Search; appends successful matches to the graph.
  int AddLoopConstraints(PoseGraph& graph, const VertexId& target);

  std::shared_ptr<const MaxGridPyramid> Pyramid(
      int index, const submaps::Submap& submap) const;

 private:
  struct NodeScan {
    std::int64_t scan_index = 0;
    std::shared_ptr<const Scan2D> scan;
  };

  bool Eligible(const PoseGraph& graph, int submap, int node) const;

  LoopClosureOptions options_;
  std::vector<std::shared_ptr<const submaps::Submap>> submaps_;
  std::map<int, NodeScan> node_scans_;
  std::set<std::pair<int, int>> searched_;

  mutable std::mutex cache_mutex_;
  mutable std::list<std::pair<int, std::shared_ptr<const MaxGridPyramid>>> cache_;
};

}  // namespace semslam::loop_closure
