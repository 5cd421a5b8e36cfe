#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "semslam/core/pose.h"
#include "semslam/core/types.h"

namespace semslam::io {

namespace fs = std::filesystem;

struct SequencePaths {
  fs::path velodyne_dir;
  std::optional<fs::path> labels_dir;
  std::optional<fs::path> calib_file;
  std::optional<fs::path> poses_file;

  // Resolves a KITTI sequence directory laid out as
  //   <dir>/velodyne/NNNNNN.bin, <dir>/labels/NNNNNN.label,
  //   <dir>/calib.txt, <dir>/poses.txt
  // Missing optional parts are left empty. A directory holding the .bin files
  // directly is also accepted.
  static SequencePaths FromSequenceDir(const fs::path& dir);

  // Number of consecutive scans starting at 000000.bin.
  std::size_t ScanCount() const;
  fs::path ScanPath(std::size_t index) const;
  std::optional<fs::path> LabelPath(std::size_t index) const;
};

struct DecodedLabel {
  Label semantic;
  std::uint16_t instance;
};

// SemanticKITTI packing: low 16 bits semantic class, high 16 bits instance.
constexpr DecodedLabel DecodeLabel(std::uint32_t raw) {
  return {static_cast<Label>(raw & 0xFFFFu),
          static_cast<std::uint16_t>(raw >> 16)};
}
constexpr std::uint32_t EncodeLabel(Label semantic, std::uint16_t instance) {
  return (static_cast<std::uint32_t>(instance) << 16) | semantic;
}

// Sweep timing from azimuth. The sweep starts facing backwards (azimuth pi)
// and rotates clockwise, so forward-facing points sit at 0.5.
double AzimuthTimeOffset(const Eigen::Vector3d& point);

// Reads a velodyne .bin (float32 x, y, z, intensity, little endian) and the
// optional .label file. Confidence is 1 for every point.
Scan ReadScan(const fs::path& bin_path,
              const std::optional<fs::path>& label_path = std::nullopt);

// Writes the .bin (intensity 0) and, when label_path is given, the .label.
void WriteScan(const Scan& scan, const fs::path& bin_path,
               const std::optional<fs::path>& label_path = std::nullopt);

// Decodes raw buffers; exposed for tests and in-memory sources.
Scan DecodeScan(std::span<const std::byte> bin,
                std::optional<std::span<const std::byte>> labels);

std::vector<Pose3> ReadPosesKitti(const fs::path& path);
void WritePosesKitti(std::span<const Pose3> trajectory, const fs::path& path);

// TUM format: "timestamp tx ty tz qx qy qz qw".
void WritePosesTum(std::span<const Pose3> trajectory,
                   std::span<const double> timestamps, const fs::path& path);

// Reads the "Tr:" velodyne-to-camera entry of a KITTI calib.txt.
Pose3 ReadVeloToCamera(const fs::path& calib_path);

// Expresses a sensor-frame trajectory in the camera frame: Tr * T * Tr^-1.
std::vector<Pose3> ToCameraFrame(std::span<const Pose3> trajectory,
                                 const Pose3& velo_to_camera);

}  // namespace semslam::io
