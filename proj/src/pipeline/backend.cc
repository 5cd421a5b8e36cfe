#include "semslam/pipeline/backend.h"

#include "semslam/preprocessing/preprocessing.h"

namespace semslam::pipeline {

using loop_closure::Constraint;
using loop_closure::ConstraintKind;
using loop_closure::Se2;
using loop_closure::VertexId;

namespace {

Se2 Planar(const Pose3& pose) { return Se2::FromPose3(pose); }

Constraint OdometryConstraint(const VertexId& from, const VertexId& to,
                              const Se2& relative,
                              const loop_closure::ConstraintWeights& w) {
  Constraint c;
  c.kind = ConstraintKind::kOdometry;
  c.from = from;
  c.to = to;
  c.relative_pose = relative;
  c.translation_weight = w.odometry_translation();
  c.rotation_weight = w.odometry_rotation();
  return c;
}

}  // namespace

MappingBackend::MappingBackend(const PipelineConfig& config, bool loop_closure)
    : config_(config),
      loop_enabled_(loop_closure),
      loop_(config.loop),
      pool_(std::make_unique<ThreadPool>(loop_closure ? EffectiveThreads(config) : 0)) {
  config_.Validate();
}

MappingBackend::~MappingBackend() {
  // Outstanding futures must finish before loop_ goes away.
  for (auto& batch : pending_) {
    for (auto& f : batch.results) {
      if (f.valid()) f.wait();
    }
  }
  pool_.reset();
}

void MappingBackend::AddScan(std::int64_t scan_index, const Pose3& odometry_pose,
                             const Scan& frame) {
  if (finished_) throw Error("backend already finished");
  last_scan_index_ = scan_index;
  const auto& w = config_.loop.weights;

  // Node, seeded from the previous estimate plus the odometry increment.
  const int n = graph_.num_nodes();
  Se2 initial = Planar(odometry_pose);
  if (n > 0) {
    const Se2 delta = Planar(graph_.node_odometry(n - 1)).inverse() * initial;
    initial = graph_.node_pose(n - 1) * delta;
  }
  graph_.AddNode(odometry_pose, initial);
  if (n > 0) {
    graph_.AddConstraint(OdometryConstraint(
        VertexId::Node(n - 1), VertexId::Node(n),
        Planar(graph_.node_odometry(n - 1)).inverse() * Planar(odometry_pose), w));
  }

  // A new submap every half submap length, so two are active at a time.
  const int half = std::max(1, config_.submap_scans / 2);
  if (n % half == 0) {
    const Pose3 local = Pose3::FromYaw(odometry_pose.Yaw(), odometry_pose.translation());
    submaps_.push_back(std::make_shared<submaps::Submap>(local, config_.submap));
    graph_.AddSubmap(initial);
    active_.push_back(static_cast<int>(submaps_.size()) - 1);
  }

  Scan insert = frame;
  insert.index = scan_index;
  for (const int s : active_) {
    submaps_[s]->InsertScan(insert, odometry_pose);
    const Se2 relative =
        Planar(submaps_[s]->local_pose()).inverse() * Planar(odometry_pose);
    graph_.AddConstraint(
        OdometryConstraint(VertexId::Submap(s), VertexId::Node(n), relative, w));
  }
  for (auto it = active_.begin(); it != active_.end();) {
    if (submaps_[*it]->num_scans() >= config_.submap_scans) {
      const int s = *it;
      it = active_.erase(it);
      FinishSubmap(s);
    } else {
      ++it;
    }
  }

  if (loop_enabled_ && n % config_.loop_node_stride == 0) {
    Scan query;
    query.index = scan_index;
    for (const auto& p : frame.points) {
      if (!config_.loop_match_exclude.contains(p.label)) query.points.push_back(p);
    }
    // No critical exemption here: classes enter in proportion to their area.
    query = preprocessing::AdaptiveVoxelDownsample(query, config_.loop_match_voxel, 1,
                                                   SemanticConfig{});
    loop_.SetNodeScan(n, scan_index,
                      loop_closure::ProjectScan(query, odometry_pose, config_.submap));
    Submit(VertexId::Node(n));
  }
  ApplyBatches(false);
}

void MappingBackend::FinishSubmap(int index) {
  submaps_[index]->Finalize();
  loop_.SetSubmap(index, submaps_[index]);
  if (loop_enabled_) Submit(VertexId::Submap(index));
}

void MappingBackend::Submit(const VertexId& target) {
  auto tasks = loop_.Candidates(graph_, target);
  if (tasks.empty()) return;
  Batch batch;
  batch.apply_at = graph_.num_nodes() - 1 + config_.loop_apply_delay;
  for (auto& task : tasks) {
    batch.results.push_back(
        pool_->Submit([this, task = std::move(task)] { return loop_.Search(task); }));
  }
  pending_.push_back(std::move(batch));
}

void MappingBackend::ApplyBatches(bool drain) {
  const int current = graph_.num_nodes() - 1;
  int added = 0;
  while (!pending_.empty() && (drain || pending_.front().apply_at <= current)) {
    for (auto& f : pending_.front().results) {
      if (auto c = f.get()) {
        graph_.AddConstraint(*c);
        ++added;
      }
    }
    pending_.pop_front();
  }
  if (added > 0) {
    if (first_loop_scan_ < 0) first_loop_scan_ = last_scan_index_;
    Optimize();
  }
}

void MappingBackend::Optimize() {
  loop_closure::Optimize(graph_, config_.optimizer);
  ++optimizations_;
}

void MappingBackend::Finish() {
  if (finished_) return;
  const auto open = active_;
  active_.clear();
  for (const int s : open) {
    if (submaps_[s]->num_scans() > 0) FinishSubmap(s);
  }
  ApplyBatches(true);
  if (loop_constraints() > 0) Optimize();
  finished_ = true;
}

std::vector<Pose3> MappingBackend::Trajectory() const {
  if (optimizations_ == 0) {
    std::vector<Pose3> out;
    out.reserve(graph_.num_nodes());
    for (int i = 0; i < graph_.num_nodes(); ++i) out.push_back(graph_.node_odometry(i));
    return out;
  }
  return graph_.NodePoses3();
}

std::vector<std::shared_ptr<const submaps::Submap>> MappingBackend::Submaps() const {
  return {submaps_.begin(), submaps_.end()};
}

}  // namespace semslam::pipeline
