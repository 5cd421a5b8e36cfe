#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace semslam {

// Semantic class id. SemanticKITTI numbering by default.
using Label = std::uint16_t;
inline constexpr Label kUnlabeled = 0;

// Base class for errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration values; the message names the offending key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct LabeledPoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Label label = kUnlabeled;
  // Certainty of the predicted label, in [0, 1].
  double confidence = 1.0;
  // Normalized position within the sweep, in [0, 1].
  double time_offset = 0.0;
};

struct Scan {
  std::vector<LabeledPoint> points;
  std::int64_t index = 0;
  double duration = 0.1;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
};

namespace kitti_labels {
inline constexpr Label kCar = 10;
inline constexpr Label kBicycle = 11;
inline constexpr Label kBus = 13;
inline constexpr Label kMotorcycle = 15;
inline constexpr Label kTruck = 18;
inline constexpr Label kOtherVehicle = 20;
inline constexpr Label kPerson = 30;
inline constexpr Label kRoad = 40;
inline constexpr Label kParking = 44;
inline constexpr Label kSidewalk = 48;
inline constexpr Label kBuilding = 50;
inline constexpr Label kFence = 51;
inline constexpr Label kVegetation = 70;
inline constexpr Label kTrunk = 71;
inline constexpr Label kTerrain = 72;
inline constexpr Label kPole = 80;
inline constexpr Label kTrafficSign = 81;
inline constexpr Label kMovingCar = 252;
inline constexpr Label kMovingOtherVehicle = 259;
}  // namespace kitti_labels

// SemanticKITTI id -> name table.
const std::map<Label, std::string>& SemanticKittiLabelNames();

struct SemanticConfig {
  std::set<Label> dynamic_labels;
  std::set<Label> critical_labels;
  // Label-fitness weight used when either side of a pair is unlabeled.
  double kappa_neutral = 1.0;
  double confidence_min = 0.05;
  double confidence_max = 0.95;
  std::map<Label, std::string> label_names;

  // SemanticKITTI defaults: moving-* classes are dynamic, pole and
  // traffic-sign are critical.
  static SemanticConfig Default();

  bool IsDynamic(Label label) const { return dynamic_labels.contains(label); }
  bool IsCritical(Label label) const { return critical_labels.contains(label); }

  // Throws ConfigError if the configuration violates its invariants.
  void Validate() const;

  // Resolves a class name ("car") or a numeric id ("10").
  std::optional<Label> LookupLabel(std::string_view name_or_id) const;
};

}  // namespace semslam
