#include "semslam/loop_closure/pose_graph.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "semslam/core/types.h"

namespace semslam::loop_closure {
namespace {

constexpr const char* kHeader = "SEMSLAM_POSE_GRAPH";
constexpr int kVersion = 1;

Eigen::Vector3d Weights(const Constraint& c) {
  return {c.translation_weight, c.translation_weight, c.rotation_weight};
}

// a(theta) = (theta / 2) cot(theta / 2) and its derivative.
void VInverseCoefficients(double theta, double* a, double* da) {
  const double half = 0.5 * theta;
  if (std::abs(theta) < 1e-6) {
    *a = 1.0 - theta * theta / 12.0;
    *da = -theta / 6.0;
    return;
  }
  const double s = std::sin(half);
  const double cot = std::cos(half) / s;
  *a = half * cot;
  *da = 0.5 * cot - 0.25 * theta / (s * s);
}

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int Find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void Union(int a, int b) { parent_[Find(a)] = Find(b); }

 private:
  std::vector<int> parent_;
};

std::string VertexToken(const VertexId& v) {
  return (v.type == VertexId::Type::kNode ? "n" : "s") + std::to_string(v.index);
}

VertexId ParseVertex(const std::string& token, int line) {
  if (token.size() < 2 || (token[0] != 'n' && token[0] != 's')) {
    throw Error("malformed vertex on pose graph line " + std::to_string(line));
  }
  const int index = std::stoi(token.substr(1));
  return token[0] == 'n' ? VertexId::Node(index) : VertexId::Submap(index);
}

}  // namespace

int PoseGraph::AddNode(const Pose3& odometry_pose) {
  return AddNode(odometry_pose, Se2::FromPose3(odometry_pose));
}

int PoseGraph::AddNode(const Pose3& odometry_pose, const Se2& pose) {
  node_odometry_.push_back(odometry_pose);
  node_poses_.push_back(pose);
  return num_nodes() - 1;
}

int PoseGraph::AddSubmap(const Se2& pose) {
  submap_poses_.push_back(pose);
  return num_submaps() - 1;
}

void PoseGraph::AddConstraint(const Constraint& constraint) {
  for (const auto& v : {constraint.from, constraint.to}) {
    const int n = v.type == VertexId::Type::kNode ? num_nodes() : num_submaps();
    if (v.index < 0 || v.index >= n) {
      throw Error("constraint references unknown vertex " + VertexToken(v));
    }
  }
  constraints_.push_back(constraint);
}

const Se2& PoseGraph::pose(const VertexId& v) const {
  return v.type == VertexId::Type::kNode ? node_poses_.at(v.index)
                                         : submap_poses_.at(v.index);
}

void PoseGraph::set_pose(const VertexId& v, const Se2& pose) {
  (v.type == VertexId::Type::kNode ? node_poses_.at(v.index)
                                   : submap_poses_.at(v.index)) = pose;
}

int PoseGraph::CountConstraints(ConstraintKind kind) const {
  int n = 0;
  for (const auto& c : constraints_) n += c.kind == kind ? 1 : 0;
  return n;
}

bool PoseGraph::IsConnected() const {
  const int total = num_nodes() + num_submaps();
  if (total == 0) return true;
  UnionFind uf(total);
  auto flat = [&](const VertexId& v) {
    return v.type == VertexId::Type::kNode ? v.index : num_nodes() + v.index;
  };
  for (const auto& c : constraints_) uf.Union(flat(c.from), flat(c.to));
  const int root = uf.Find(0);
  for (int i = 1; i < total; ++i) {
    if (uf.Find(i) != root) return false;
  }
  return true;
}

Pose3 PoseGraph::NodePose3(int i) const {
  return ReattachHeightAndTilt(node_poses_.at(i), node_odometry_.at(i));
}

std::vector<Pose3> PoseGraph::NodePoses3() const {
  std::vector<Pose3> out;
  out.reserve(node_poses_.size());
  for (int i = 0; i < num_nodes(); ++i) out.push_back(NodePose3(i));
  return out;
}

double PoseGraph::TotalCost() const {
  double cost = 0.0;
  for (const auto& c : constraints_) {
    cost += ConstraintResidual(c, pose(c.from), pose(c.to)).squaredNorm();
  }
  return cost;
}

Eigen::Vector3d ConstraintResidual(const Constraint& c, const Se2& from,
                                   const Se2& to) {
  const Se2 error = c.relative_pose.inverse() * (from.inverse() * to);
  return Weights(c).cwiseProduct(Se2Log(error));
}

void ConstraintJacobians(const Constraint& c, const Se2& from, const Se2& to,
                         Eigen::Vector3d* residual, Eigen::Matrix3d* d_from,
                         Eigen::Matrix3d* d_to) {
  const Eigen::Matrix2d ra_t = from.Rotation().transpose();
  const Eigen::Matrix2d rz_t = c.relative_pose.Rotation().transpose();
  const Eigen::Vector2d delta_t = ra_t * (to.translation() - from.translation());
  const Eigen::Vector2d et = rz_t * (delta_t - c.relative_pose.translation());
  const double etheta =
      NormalizeAngle(to.theta - from.theta - c.relative_pose.theta);

  double a, da;
  VInverseCoefficients(etheta, &a, &da);
  Eigen::Matrix2d v_inv;
  v_inv << a, 0.5 * etheta, -0.5 * etheta, a;
  Eigen::Matrix2d dv_inv;
  dv_inv << da, 0.5, -0.5, da;

  Eigen::Matrix2d skew;
  skew << 0.0, -1.0, 1.0, 0.0;

  // d et / d (from.t, from.theta, to.t); d etheta is -1 / +1.
  const Eigen::Matrix2d det_dta = -rz_t * ra_t;
  const Eigen::Vector2d det_dthetaa = -rz_t * skew * delta_t;
  const Eigen::Matrix2d det_dtb = rz_t * ra_t;
  const Eigen::Vector2d dv_et = dv_inv * et;

  Eigen::Matrix3d jf = Eigen::Matrix3d::Zero();
  jf.topLeftCorner<2, 2>() = v_inv * det_dta;
  jf.block<2, 1>(0, 2) = v_inv * det_dthetaa - dv_et;
  jf(2, 2) = -1.0;

  Eigen::Matrix3d jt = Eigen::Matrix3d::Zero();
  jt.topLeftCorner<2, 2>() = v_inv * det_dtb;
  jt.block<2, 1>(0, 2) = dv_et;
  jt(2, 2) = 1.0;

  const Eigen::Vector3d w = Weights(c);
  const Eigen::Vector2d exy = v_inv * et;
  *residual = w.cwiseProduct(Eigen::Vector3d(exy.x(), exy.y(), etheta));
  *d_from = w.asDiagonal() * jf;
  *d_to = w.asDiagonal() * jt;
}

OptimizationSummary Optimize(PoseGraph& graph, const OptimizerOptions& options) {
  OptimizationSummary summary;
  if (graph.num_nodes() == 0) return summary;
  if (!graph.IsConnected()) throw Error("pose graph is disconnected");

  const int free_nodes = graph.num_nodes() - 1;
  const int dim = 3 * (free_nodes + graph.num_submaps());
  auto offset = [&](const VertexId& v) {
    if (v.type == VertexId::Type::kNode) return v.index == 0 ? -1 : 3 * (v.index - 1);
    return 3 * (free_nodes + v.index);
  };

  double cost = graph.TotalCost();
  summary.initial_cost = cost;
  summary.final_cost = cost;
  if (dim == 0) {
    summary.converged = true;
    return summary;
  }

  double lambda = options.initial_lambda;
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  bool pattern_analyzed = false;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    triplets.clear();
    Eigen::VectorXd gradient = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd diagonal = Eigen::VectorXd::Zero(dim);
    for (const auto& c : graph.constraints()) {
      Eigen::Vector3d r;
      Eigen::Matrix3d jf, jt;
      ConstraintJacobians(c, graph.pose(c.from), graph.pose(c.to), &r, &jf, &jt);
      const int of = offset(c.from);
      const int ot = offset(c.to);
      const std::pair<int, const Eigen::Matrix3d*> blocks[2] = {{of, &jf},
                                                               {ot, &jt}};
      for (const auto& [oi, ji] : blocks) {
        if (oi < 0) continue;
        gradient.segment<3>(oi) += ji->transpose() * r;
        for (const auto& [oj, jj] : blocks) {
          if (oj < 0) continue;
          const Eigen::Matrix3d h = ji->transpose() * *jj;
          for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
              triplets.emplace_back(oi + a, oj + b, h(a, b));
            }
          }
          if (oi == oj) diagonal.segment<3>(oi) += h.diagonal();
        }
      }
    }
    summary.gradient_norm = gradient.norm();
    if (summary.gradient_norm < options.gradient_tolerance) {
      summary.converged = true;
      break;
    }
    summary.iterations = iter + 1;

    Eigen::SparseMatrix<double> hessian(dim, dim);
    hessian.setFromTriplets(triplets.begin(), triplets.end());
    const Eigen::SparseMatrix<double> h0 = hessian;

    bool accepted = false;
    while (!accepted && lambda < 1e12) {
      hessian = h0;
      for (int i = 0; i < dim; ++i) {
        hessian.coeffRef(i, i) += lambda * (diagonal(i) + 1e-9);
      }
      if (!pattern_analyzed) {
        solver.analyzePattern(hessian);
        pattern_analyzed = true;
      }
      solver.factorize(hessian);
      if (solver.info() != Eigen::Success) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd step = solver.solve(-gradient);

      PoseGraph candidate = graph;
      auto apply = [&](const VertexId& v) {
        const int o = offset(v);
        if (o < 0) return;
        const Se2& p = graph.pose(v);
        candidate.set_pose(v, Se2(p.x + step(o), p.y + step(o + 1),
                                  NormalizeAngle(p.theta + step(o + 2))));
      };
      for (int i = 0; i < graph.num_nodes(); ++i) apply(VertexId::Node(i));
      for (int i = 0; i < graph.num_submaps(); ++i) apply(VertexId::Submap(i));

      const double new_cost = candidate.TotalCost();
      if (new_cost < cost) {
        graph = std::move(candidate);
        cost = new_cost;
        lambda = std::max(lambda * 0.1, 1e-12);
        accepted = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) break;
  }
  summary.final_cost = cost;
  return summary;
}

std::string SerializePoseGraph(const PoseGraph& graph) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << kHeader << ' ' << kVersion << '\n';
  for (int i = 0; i < graph.num_nodes(); ++i) {
    const Se2& p = graph.node_pose(i);
    const Pose3& o = graph.node_odometry(i);
    const auto& t = o.translation();
    const auto& q = o.rotation();
    out << "NODE " << i << ' ' << p.x << ' ' << p.y << ' ' << p.theta << ' '
        << t.x() << ' ' << t.y() << ' ' << t.z() << ' ' << q.x() << ' ' << q.y()
        << ' ' << q.z() << ' ' << q.w() << '\n';
  }
  for (int i = 0; i < graph.num_submaps(); ++i) {
    const Se2& p = graph.submap_pose(i);
    out << "SUBMAP " << i << ' ' << p.x << ' ' << p.y << ' ' << p.theta << '\n';
  }
  for (const auto& c : graph.constraints()) {
    out << "CONSTRAINT "
        << (c.kind == ConstraintKind::kLoop ? "loop" : "odometry") << ' '
        << VertexToken(c.from) << ' ' << VertexToken(c.to) << ' '
        << c.relative_pose.x << ' ' << c.relative_pose.y << ' '
        << c.relative_pose.theta << ' ' << c.translation_weight << ' '
        << c.rotation_weight << ' ' << c.score << '\n';
  }
  return out.str();
}

PoseGraph DeserializePoseGraph(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  PoseGraph graph;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string tag;
    fields >> tag;
    auto fail = [&] {
      return Error("malformed pose graph line " + std::to_string(line_no));
    };
    if (!header) {
      int version = 0;
      if (tag != kHeader || !(fields >> version)) throw fail();
      if (version != kVersion) {
        throw Error("unsupported pose graph version " + std::to_string(version));
      }
      header = true;
      continue;
    }
    if (tag == "NODE") {
      int index;
      double x, y, th, tx, ty, tz, qx, qy, qz, qw;
      if (!(fields >> index >> x >> y >> th >> tx >> ty >> tz >> qx >> qy >> qz >> qw) ||
          index != graph.num_nodes()) {
        throw fail();
      }
      graph.AddNode(Pose3(Eigen::Quaterniond(qw, qx, qy, qz), {tx, ty, tz}),
                    Se2(x, y, th));
    } else if (tag == "SUBMAP") {
      int index;
      double x, y, th;
      if (!(fields >> index >> x >> y >> th) || index != graph.num_submaps()) {
        throw fail();
      }
      graph.AddSubmap(Se2(x, y, th));
    } else if (tag == "CONSTRAINT") {
      std::string kind, from, to;
      Constraint c;
      if (!(fields >> kind >> from >> to >> c.relative_pose.x >>
            c.relative_pose.y >> c.relative_pose.theta >> c.translation_weight >>
            c.rotation_weight >> c.score)) {
        throw fail();
      }
      if (kind == "loop") {
        c.kind = ConstraintKind::kLoop;
      } else if (kind == "odometry") {
        c.kind = ConstraintKind::kOdometry;
      } else {
        throw fail();
      }
      c.from = ParseVertex(from, line_no);
      c.to = ParseVertex(to, line_no);
      graph.AddConstraint(c);
    } else {
      throw fail();
    }
  }
  if (!header) throw Error("missing pose graph header");
  return graph;
}

void WritePoseGraph(const PoseGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << SerializePoseGraph(graph);
  if (!out) throw Error("cannot write " + path.string());
}

PoseGraph ReadPoseGraph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return DeserializePoseGraph(buffer.str());
}

}  // namespace semslam::loop_closure
