#include "semslam/core/types.h"

#include <charconv>

namespace semslam {

const std::map<Label, std::string>& SemanticKittiLabelNames() {
  static const std::map<Label, std::string> kNames = {
      {0, "unlabeled"},
      {1, "outlier"},
      {10, "car"},
      {11, "bicycle"},
      {13, "bus"},
      {15, "motorcycle"},
      {16, "on-rails"},
      {18, "truck"},
      {20, "other-vehicle"},
      {30, "person"},
      {31, "bicyclist"},
      {32, "motorcyclist"},
      {40, "road"},
      {44, "parking"},
      {48, "sidewalk"},
      {49, "other-ground"},
      {50, "building"},
      {51, "fence"},
      {52, "other-structure"},
      {60, "lane-marking"},
      {70, "vegetation"},
      {71, "trunk"},
      {72, "terrain"},
      {80, "pole"},
      {81, "traffic-sign"},
      {99, "other-object"},
      {252, "moving-car"},
      {253, "moving-bicyclist"},
      {254, "moving-person"},
      {255, "moving-motorcyclist"},
      {256, "moving-on-rails"},
      {257, "moving-bus"},
      {258, "moving-truck"},
      {259, "moving-other-vehicle"},
  };
  return kNames;
}

SemanticConfig SemanticConfig::Default() {
  SemanticConfig cfg;
  for (Label l = 252; l <= 259; ++l) cfg.dynamic_labels.insert(l);
  cfg.critical_labels = {kitti_labels::kPole, kitti_labels::kTrafficSign};
  cfg.label_names = SemanticKittiLabelNames();
  return cfg;
}

void SemanticConfig::Validate() const {
  if (!(kappa_neutral >= 0.0 && kappa_neutral <= 1.0)) {
    throw ConfigError("kappa_neutral must lie in [0, 1]");
  }
  if (!(confidence_min > 0.0 && confidence_min < 1.0)) {
    throw ConfigError("confidence_min must lie in (0, 1)");
  }
  if (!(confidence_max > 0.0 && confidence_max < 1.0)) {
    throw ConfigError("confidence_max must lie in (0, 1)");
  }
  if (!(confidence_min < confidence_max)) {
    throw ConfigError("confidence_min must be below confidence_max");
  }
  for (Label l : dynamic_labels) {
    if (critical_labels.contains(l)) {
      throw ConfigError("dynamic_labels and critical_labels overlap on " +
                        std::to_string(l));
    }
  }
}

std::optional<Label> SemanticConfig::LookupLabel(
    std::string_view name_or_id) const {
  unsigned value = 0;
  const auto* end = name_or_id.data() + name_or_id.size();
  if (auto [ptr, ec] = std::from_chars(name_or_id.data(), end, value);
      ec == std::errc() && ptr == end && value <= 0xFFFF) {
    return static_cast<Label>(value);
  }
  for (const auto& [id, name] : label_names) {
    if (name == name_or_id) return id;
  }
  return std::nullopt;
}

}  // namespace semslam
