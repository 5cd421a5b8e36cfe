#include "semslam/loop_closure/loop_closure.h"

#include <algorithm>

namespace semslam::loop_closure {

Scan2D ProjectScan(const Scan& scan, const Pose3& pose,
                   const submaps::SubmapOptions& options) {
  const Pose3 local = Pose3::FromYaw(pose.Yaw(), pose.translation());
  Scan2D out;
  out.reserve(scan.size());
  Eigen::Vector2d p;
  for (const auto& point : scan.points) {
    if (submaps::ProjectToGridPlane(point.position, pose, local, options, &p)) {
      out.push_back({p, point.label});
    }
  }
  return out;
}

LoopClosure::LoopClosure(const LoopClosureOptions& options) : options_(options) {
  if (options_.pyramid_cache_size < 1) {
    throw ConfigError("pyramid_cache_size must be at least 1");
  }
}

void LoopClosure::SetSubmap(int index,
                            std::shared_ptr<const submaps::Submap> submap) {
  if (index < 0) throw Error("negative submap index");
  if (static_cast<std::size_t>(index) >= submaps_.size()) {
    submaps_.resize(index + 1);
  }
  submaps_[index] = std::move(submap);
  std::lock_guard lock(cache_mutex_);
  cache_.remove_if([index](const auto& e) { return e.first == index; });
}

void LoopClosure::SetNodeScan(int node, std::int64_t scan_index, Scan2D scan) {
  node_scans_[node] = {scan_index, std::make_shared<const Scan2D>(std::move(scan))};
}

bool LoopClosure::Eligible(const PoseGraph& graph, int submap, int node) const {
  if (submap >= static_cast<int>(submaps_.size()) || !submaps_[submap] ||
      !submaps_[submap]->finished()) {
    return false;
  }
  if (submap >= graph.num_submaps() || node >= graph.num_nodes()) return false;
  const auto it = node_scans_.find(node);
  if (it == node_scans_.end() || it->second.scan->empty()) return false;
  if (searched_.count({submap, node}) != 0) return false;

  const auto [first, last] = submaps_[submap]->scan_range();
  const std::int64_t s = it->second.scan_index;
  if (s >= first - options_.min_scan_gap && s <= last + options_.min_scan_gap) {
    return false;
  }
  const double distance =
      (graph.submap_pose(submap).translation() - graph.node_pose(node).translation())
          .norm();
  return distance < options_.search_radius;
}

std::vector<LoopSearchTask> LoopClosure::Candidates(const PoseGraph& graph,
                                                    const VertexId& target) {
  std::vector<std::pair<int, int>> pairs;
  if (target.type == VertexId::Type::kNode) {
    for (int s = 0; s < static_cast<int>(submaps_.size()); ++s) {
      if (Eligible(graph, s, target.index)) pairs.emplace_back(s, target.index);
    }
  } else {
    for (const auto& [node, scan] : node_scans_) {
      if (Eligible(graph, target.index, node)) pairs.emplace_back(target.index, node);
    }
  }
  std::vector<LoopSearchTask> tasks;
  tasks.reserve(pairs.size());
  for (const auto& [s, n] : pairs) {
    searched_.insert({s, n});
    tasks.push_back({s, n, graph.submap_pose(s).inverse() * graph.node_pose(n),
                     submaps_[s], node_scans_.at(n).scan});
  }
  return tasks;
}

std::shared_ptr<const MaxGridPyramid> LoopClosure::Pyramid(
    int submap, const submaps::Submap& data) const {
  {
    std::lock_guard lock(cache_mutex_);
    const auto it = std::find_if(cache_.begin(), cache_.end(),
                                 [submap](const auto& e) { return e.first == submap; });
    if (it != cache_.end()) {
      cache_.splice(cache_.begin(), cache_, it);
      return it->second;
    }
  }
  auto pyramid = std::make_shared<const MaxGridPyramid>(
      data.grid(), options_.pyramid_depth);
  std::lock_guard lock(cache_mutex_);
  const auto it = std::find_if(cache_.begin(), cache_.end(),
                               [submap](const auto& e) { return e.first == submap; });
  if (it != cache_.end()) return it->second;
  cache_.emplace_front(submap, pyramid);
  while (static_cast<int>(cache_.size()) > options_.pyramid_cache_size) {
    cache_.pop_back();
  }
  return pyramid;
}

std::optional<Constraint> LoopClosure::Search(const LoopSearchTask& task) const {
  const auto& scan = *task.scan;
  const auto pyramid = Pyramid(task.submap, *task.submap_data);
  const auto match = BranchAndBoundMatch(*pyramid, scan, task.initial_relative,
                                         options_.window, options_.min_score);
  if (!match) return std::nullopt;
  Constraint c;
  c.kind = ConstraintKind::kLoop;
  c.from = VertexId::Submap(task.submap);
  c.to = VertexId::Node(task.node);
  c.relative_pose = match->pose;
  c.translation_weight = options_.weights.loop_translation;
  c.rotation_weight = options_.weights.loop_rotation;
  c.score = match->score;
  return c;
}

int LoopClosure::AddLoopConstraints(PoseGraph& graph, const VertexId& target) {
  int added = 0;
  for (const auto& task : Candidates(graph, target)) {
    if (auto c = Search(task)) {
      graph.AddConstraint(*c);
      ++added;
    }
  }
  return added;
}

}  // namespace semslam::loop_closure
