#include "semslam/pipeline/config.h"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <thread>
#include <vector>

namespace semslam::pipeline {
namespace {

std::string_view Trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

ConfigError Invalid(std::string_view key, std::string_view value) {
  return ConfigError("invalid value for '" + std::string(key) + "': '" +
                     std::string(value) + "'");
}

double ToDouble(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    throw Invalid(key, value);
  }
  return out;
}

int ToInt(std::string_view key, std::string_view value) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) throw Invalid(key, value);
  return out;
}

bool ToBool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw Invalid(key, value);
}

std::vector<std::string_view> SplitList(std::string_view value) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto end = value.find_first_of(", ", start);
    const auto item = Trim(value.substr(start, end == std::string_view::npos
                                                   ? std::string_view::npos
                                                   : end - start));
    if (!item.empty()) out.push_back(item);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

std::set<Label> ToLabels(const PipelineConfig& c, std::string_view key,
                         std::string_view value) {
  std::set<Label> out;
  if (value == "none") return out;
  for (const auto item : SplitList(value)) {
    const auto label = c.semantic.LookupLabel(item);
    if (!label) throw Invalid(key, item);
    out.insert(*label);
  }
  return out;
}

std::string LabelsToString(const std::set<Label>& labels) {
  if (labels.empty()) return "none";
  std::string out;
  for (Label l : labels) out += (out.empty() ? "" : ",") + std::to_string(l);
  return out;
}

std::string Num(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

struct Field {
  const char* key;
  std::function<void(PipelineConfig&, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

#define SEMSLAM_DOUBLE(name, member)                                           \
  Field{name, [](PipelineConfig& c, std::string_view v) { c.member = ToDouble(name, v); }, \
        [](const PipelineConfig& c) { return Num(c.member); }}
#define SEMSLAM_INT(name, member)                                              \
  Field{name, [](PipelineConfig& c, std::string_view v) { c.member = ToInt(name, v); }, \
        [](const PipelineConfig& c) { return std::to_string(c.member); }}
#define SEMSLAM_BOOL(name, member)                                             \
  Field{name, [](PipelineConfig& c, std::string_view v) { c.member = ToBool(name, v); }, \
        [](const PipelineConfig& c) { return std::string(c.member ? "true" : "false"); }}
#define SEMSLAM_LABELS(name, member)                                           \
  Field{name, [](PipelineConfig& c, std::string_view v) { c.member = ToLabels(c, name, v); }, \
        [](const PipelineConfig& c) { return LabelsToString(c.member); }}

const std::vector<Field>& Fields() {
  constexpr double kDeg = std::numbers::pi / 180.0;
  static const std::vector<Field> fields = {
      SEMSLAM_DOUBLE("voxel_size", voxel_size),
      SEMSLAM_INT("max_points_per_voxel", max_points_per_voxel),
      SEMSLAM_DOUBLE("registration_voxel_factor", registration_voxel_factor),
      SEMSLAM_DOUBLE("initial_threshold", initial_threshold),
      SEMSLAM_DOUBLE("min_motion", min_motion),
      SEMSLAM_DOUBLE("max_range", max_range),
      SEMSLAM_BOOL("deskew", deskew),
      SEMSLAM_BOOL("semantic_weighting", registration.semantic_weighting),
      SEMSLAM_INT("max_iterations", registration.max_iterations),
      SEMSLAM_DOUBLE("convergence_threshold", registration.convergence),
      SEMSLAM_LABELS("dynamic_labels", semantic.dynamic_labels),
      SEMSLAM_LABELS("critical_labels", semantic.critical_labels),
      SEMSLAM_DOUBLE("kappa_neutral", semantic.kappa_neutral),
      SEMSLAM_DOUBLE("confidence_min", semantic.confidence_min),
      SEMSLAM_DOUBLE("confidence_max", semantic.confidence_max),
      SEMSLAM_DOUBLE("grid_resolution", submap.resolution),
      SEMSLAM_INT("submap_scans", submap_scans),
      SEMSLAM_DOUBLE("submap_min_height", submap.min_height),
      SEMSLAM_DOUBLE("submap_max_height", submap.max_height),
      SEMSLAM_DOUBLE("submap_max_range", submap.max_range),
      SEMSLAM_DOUBLE("loop_search_radius", loop.search_radius),
      SEMSLAM_DOUBLE("loop_window_x", loop.window.x),
      SEMSLAM_DOUBLE("loop_window_y", loop.window.y),
      Field{"loop_window_theta_deg",
            [](PipelineConfig& c, std::string_view v) {
              c.loop.window.theta = ToDouble("loop_window_theta_deg", v) * kDeg;
            },
            [](const PipelineConfig& c) { return Num(c.loop.window.theta / kDeg); }},
      SEMSLAM_DOUBLE("loop_min_score", loop.min_score),
      SEMSLAM_INT("loop_pyramid_depth", loop.pyramid_depth),
      SEMSLAM_INT("loop_min_scan_gap", loop.min_scan_gap),
      SEMSLAM_INT("loop_node_stride", loop_node_stride),
      SEMSLAM_LABELS("loop_match_exclude", loop_match_exclude),
      SEMSLAM_DOUBLE("loop_match_voxel", loop_match_voxel),
      SEMSLAM_INT("loop_apply_delay", loop_apply_delay),
      SEMSLAM_INT("pyramid_cache_size", loop.pyramid_cache_size),
      SEMSLAM_DOUBLE("loop_translation_weight", loop.weights.loop_translation),
      SEMSLAM_DOUBLE("loop_rotation_weight", loop.weights.loop_rotation),
      SEMSLAM_DOUBLE("odometry_weight_factor", loop.weights.odometry_factor),
      SEMSLAM_INT("optimizer_max_iterations", optimizer.max_iterations),
      SEMSLAM_DOUBLE("optimizer_gradient_tolerance", optimizer.gradient_tolerance),
      SEMSLAM_DOUBLE("export_voxel", export_voxel),
      SEMSLAM_LABELS("export_exclude", export_exclude),
      SEMSLAM_BOOL("export_map", export_map),
      SEMSLAM_DOUBLE("scan_period", scan_period),
      Field{"inject_drift",
            [](PipelineConfig& c, std::string_view v) {
              const auto items = SplitList(v);
              if (items.size() != 6) throw Invalid("inject_drift", v);
              Vector6d x;
              for (int i = 0; i < 6; ++i) x(i) = ToDouble("inject_drift", items[i]);
              c.inject_drift = Twist6::FromVector(x);
            },
            [](const PipelineConfig& c) {
              const Vector6d x = c.inject_drift.AsVector();
              std::string out;
              for (int i = 0; i < 6; ++i) out += (i ? " " : "") + Num(x(i));
              return out;
            }},
      SEMSLAM_INT("threads", threads),
  };
  return fields;
}

#undef SEMSLAM_DOUBLE
#undef SEMSLAM_INT
#undef SEMSLAM_BOOL
#undef SEMSLAM_LABELS

void Require(bool ok, const char* key, const char* what) {
  if (!ok) throw ConfigError(std::string("'") + key + "' " + what);
}

}  // namespace

void PipelineConfig::Set(std::string_view key, std::string_view value) {
  for (const auto& f : Fields()) {
    if (key == f.key) {
      f.set(*this, Trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void PipelineConfig::Validate() const {
  Require(voxel_size > 0.0, "voxel_size", "must be positive");
  Require(max_points_per_voxel >= 1, "max_points_per_voxel", "must be at least 1");
  Require(registration_voxel_factor > 0.0, "registration_voxel_factor", "must be positive");
  Require(initial_threshold > 0.0, "initial_threshold", "must be positive");
  Require(min_motion >= 0.0, "min_motion", "must be non-negative");
  Require(max_range > 0.0, "max_range", "must be positive");
  Require(registration.max_iterations >= 1, "max_iterations", "must be at least 1");
  Require(registration.convergence > 0.0, "convergence_threshold", "must be positive");
  semantic.Validate();
  Require(submap.resolution > 0.0, "grid_resolution", "must be positive");
  Require(submap_scans >= 2, "submap_scans", "must be at least 2");
  Require(submap.min_height < submap.max_height, "submap_min_height",
          "must be below submap_max_height");
  Require(submap.max_range > 0.0, "submap_max_range", "must be positive");
  Require(loop.search_radius > 0.0, "loop_search_radius", "must be positive");
  Require(loop.window.x >= 0.0, "loop_window_x", "must be non-negative");
  Require(loop.window.y >= 0.0, "loop_window_y", "must be non-negative");
  Require(loop.window.theta >= 0.0 && loop.window.theta <= std::numbers::pi,
          "loop_window_theta_deg", "must lie in [0, 180]");
  Require(loop.min_score >= 0.0 && loop.min_score <= 1.0, "loop_min_score",
          "must lie in [0, 1]");
  Require(loop.pyramid_depth >= 0 && loop.pyramid_depth <= 16, "loop_pyramid_depth",
          "must lie in [0, 16]");
  Require(loop.min_scan_gap >= 0, "loop_min_scan_gap", "must be non-negative");
  Require(loop_node_stride >= 1, "loop_node_stride", "must be at least 1");
  Require(loop_match_voxel > 0.0, "loop_match_voxel", "must be positive");
  Require(loop_apply_delay >= 0, "loop_apply_delay", "must be non-negative");
  Require(loop.pyramid_cache_size >= 1, "pyramid_cache_size", "must be at least 1");
  Require(loop.weights.loop_translation > 0.0, "loop_translation_weight", "must be positive");
  Require(loop.weights.loop_rotation > 0.0, "loop_rotation_weight", "must be positive");
  Require(loop.weights.odometry_factor > 0.0, "odometry_weight_factor", "must be positive");
  Require(optimizer.max_iterations >= 1, "optimizer_max_iterations", "must be at least 1");
  Require(optimizer.gradient_tolerance > 0.0, "optimizer_gradient_tolerance",
          "must be positive");
  Require(export_voxel > 0.0, "export_voxel", "must be positive");
  Require(scan_period > 0.0, "scan_period", "must be positive");
  Require(threads >= -1, "threads", "must be -1, 0 or positive");
}

PipelineConfig PipelineConfig::Parse(std::string_view text) {
  PipelineConfig config;
  std::size_t start = 0;
  int line_no = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        " is not key = value");
    }
    config.Set(Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
  }
  config.Validate();
  return config;
}

PipelineConfig PipelineConfig::FromFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str());
}

std::string PipelineConfig::ToString() const {
  std::string out;
  for (const auto& f : Fields()) out += std::string(f.key) + " = " + f.get(*this) + "\n";
  return out;
}

int EffectiveThreads(const PipelineConfig& config) {
  int n = config.threads;
  if (n < 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("SEMSLAM_THREADS")) {
    int cap = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
    if (ec == std::errc() && ptr == s.data() + s.size() && cap >= 0) n = std::min(n, cap);
  }
  return n;
}

}  // namespace semslam::pipeline
