#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "semslam/core/pose.h"
#include "semslam/loop_closure/se2.h"

namespace semslam::loop_closure {

enum class ConstraintKind { kOdometry, kLoop };

// Graph vertex: a trajectory node or a submap origin.
struct VertexId {
  enum class Type : std::uint8_t { kNode, kSubmap };
  Type type = Type::kNode;
  int index = 0;

  static VertexId Node(int i) { return {Type::kNode, i}; }
  static VertexId Submap(int i) { return {Type::kSubmap, i}; }
  bool operator==(const VertexId&) const = default;
};

struct Constraint {
  ConstraintKind kind = ConstraintKind::kOdometry;
  VertexId from;
  VertexId to;
  // Measured from^-1 * to.
  Se2 relative_pose;
  double translation_weight = 1.0;
  double rotation_weight = 1.0;
  // Match score for loop constraints, 1 otherwise.
  double score = 1.0;
};

struct ConstraintWeights {
  double loop_translation = 1.0;
  double loop_rotation = 10.0;
  // Odometry weights are this multiple of the loop weights.
  double odometry_factor = 10.0;

  double odometry_translation() const { return odometry_factor * loop_translation; }
  double odometry_rotation() const { return odometry_factor * loop_rotation; }
};

class PoseGraph {
 public:
  // Node pose is the ground-plane projection of odometry_pose unless given.
  int AddNode(const Pose3& odometry_pose);
  int AddNode(const Pose3& odometry_pose, const Se2& pose);
  int AddSubmap(const Se2& pose);
  void AddConstraint(const Constraint& constraint);

  int num_nodes() const { return static_cast<int>(node_poses_.size()); }
  int num_submaps() const { return static_cast<int>(submap_poses_.size()); }

  const Se2& node_pose(int i) const { return node_poses_.at(i); }
  const Se2& submap_pose(int i) const { return submap_poses_.at(i); }
  const Pose3& node_odometry(int i) const { return node_odometry_.at(i); }
  const Se2& pose(const VertexId& v) const;
  void set_pose(const VertexId& v, const Se2& pose);

  const std::vector<Constraint>& constraints() const { return constraints_; }
  int CountConstraints(ConstraintKind kind) const;

  // Every vertex reachable from node 0.
  bool IsConnected() const;

  // Optimized ground-plane pose with z, roll and pitch from odometry.
  Pose3 NodePose3(int i) const;
  std::vector<Pose3> NodePoses3() const;

  // Weighted squared residual sum over all constraints.
  double TotalCost() const;

 private:
  std::vector<Se2> node_poses_;
  std::vector<Pose3> node_odometry_;
  std::vector<Se2> submap_poses_;
  std::vector<Constraint> constraints_;
};

// Weighted residual of a constraint given the two vertex poses.
Eigen::Vector3d ConstraintResidual(const Constraint& c, const Se2& from,
                                   const Se2& to);

// Residual and its 3x3 Jacobians with respect to (x, y, theta) of from and to.
void ConstraintJacobians(const Constraint& c, const Se2& from, const Se2& to,
                         Eigen::Vector3d* residual, Eigen::Matrix3d* d_from,
                         Eigen::Matrix3d* d_to);

struct OptimizerOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
  double initial_lambda = 1e-6;
};

struct OptimizationSummary {
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
};

// Levenberg-Marquardt over all vertex poses with node 0 held fixed. Throws
// Error if the graph is disconnected.
OptimizationSummary Optimize(PoseGraph& graph, const OptimizerOptions& options = {});

// Line-oriented text: a version header followed by NODE, SUBMAP and
// CONSTRAINT records.
std::string SerializePoseGraph(const PoseGraph& graph);
PoseGraph DeserializePoseGraph(const std::string& text);
void WritePoseGraph(const PoseGraph& graph, const std::filesystem::path& path);
PoseGraph ReadPoseGraph(const std::filesystem::path& path);

}  // namespace semslam::loop_closure
