#include "semslam/io/kitti_io.h"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/SVD>

namespace semslam::io {
namespace {

constexpr std::size_t kBytesPerPoint = 16;
constexpr double kMaxOrthonormalDeviation = 1e-3;

template <typename T>
T LoadLittleEndian(const std::byte* data) {
  static_assert(sizeof(T) == 4);
  std::uint32_t raw;
  std::memcpy(&raw, data, sizeof(raw));
  if constexpr (std::endian::native == std::endian::big) {
    raw = ((raw & 0xFFu) << 24) | ((raw & 0xFF00u) << 8) |
          ((raw >> 8) & 0xFF00u) | (raw >> 24);
  }
  return std::bit_cast<T>(raw);
}

template <typename T>
void StoreLittleEndian(T value, std::ostream& out) {
  static_assert(sizeof(T) == 4);
  auto raw = std::bit_cast<std::uint32_t>(value);
  if constexpr (std::endian::native == std::endian::big) {
    raw = ((raw & 0xFFu) << 24) | ((raw & 0xFF00u) << 8) |
          ((raw >> 8) & 0xFF00u) | (raw >> 24);
  }
  char bytes[4];
  std::memcpy(bytes, &raw, 4);
  out.write(bytes, 4);
}

std::vector<std::byte> ReadFileBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(size));
  if (!in) throw Error("cannot read " + path.string());
  return bytes;
}

std::ofstream OpenForWrite(const fs::path& path, std::ios::openmode mode = {}) {
  std::ofstream out(path, mode);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

fs::path IndexedPath(const fs::path& dir, std::size_t index,
                     const char* extension) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06zu%s", index, extension);
  return dir / name;
}

}  // namespace

SequencePaths SequencePaths::FromSequenceDir(const fs::path& dir) {
  SequencePaths paths;
  paths.velodyne_dir =
      fs::is_directory(dir / "velodyne") ? dir / "velodyne" : dir;
  if (fs::is_directory(dir / "labels")) paths.labels_dir = dir / "labels";
  if (fs::is_regular_file(dir / "calib.txt")) paths.calib_file = dir / "calib.txt";
  if (fs::is_regular_file(dir / "poses.txt")) paths.poses_file = dir / "poses.txt";
  return paths;
}

std::size_t SequencePaths::ScanCount() const {
  std::size_t n = 0;
  while (fs::exists(ScanPath(n))) ++n;
  return n;
}

fs::path SequencePaths::ScanPath(std::size_t index) const {
  return IndexedPath(velodyne_dir, index, ".bin");
}

std::optional<fs::path> SequencePaths::LabelPath(std::size_t index) const {
  if (!labels_dir) return std::nullopt;
  return IndexedPath(*labels_dir, index, ".label");
}

double AzimuthTimeOffset(const Eigen::Vector3d& point) {
  const double azimuth = std::atan2(point.y(), point.x());
  return 0.5 * (1.0 - azimuth / std::numbers::pi);
}

Scan DecodeScan(std::span<const std::byte> bin,
                std::optional<std::span<const std::byte>> labels) {
  if (bin.size() % kBytesPerPoint != 0) throw Error("malformed scan");
  const std::size_t count = bin.size() / kBytesPerPoint;
  if (labels) {
    if (labels->size() % 4 != 0) throw Error("malformed scan");
    if (labels->size() / 4 != count) {
      throw Error("label/scan length mismatch");
    }
  }

  Scan scan;
  scan.points.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::byte* p = bin.data() + i * kBytesPerPoint;
    LabeledPoint& point = scan.points[i];
    point.position = Eigen::Vector3d(LoadLittleEndian<float>(p),
                                     LoadLittleEndian<float>(p + 4),
                                     LoadLittleEndian<float>(p + 8));
    point.time_offset = AzimuthTimeOffset(point.position);
    if (labels) {
      point.label =
          DecodeLabel(LoadLittleEndian<std::uint32_t>(labels->data() + 4 * i))
              .semantic;
    }
  }
  return scan;
}

Scan ReadScan(const fs::path& bin_path,
              const std::optional<fs::path>& label_path) {
  const auto bin = ReadFileBytes(bin_path);
  if (!label_path) return DecodeScan(bin, std::nullopt);
  const auto labels = ReadFileBytes(*label_path);
  return DecodeScan(bin, std::span<const std::byte>(labels));
}

void WriteScan(const Scan& scan, const fs::path& bin_path,
               const std::optional<fs::path>& label_path) {
  auto out = OpenForWrite(bin_path, std::ios::binary);
  for (const auto& point : scan.points) {
    StoreLittleEndian(static_cast<float>(point.position.x()), out);
    StoreLittleEndian(static_cast<float>(point.position.y()), out);
    StoreLittleEndian(static_cast<float>(point.position.z()), out);
    StoreLittleEndian(0.0f, out);
  }
  if (!label_path) return;
  auto labels = OpenForWrite(*label_path, std::ios::binary);
  for (const auto& point : scan.points) {
    StoreLittleEndian(EncodeLabel(point.label, 0), labels);
  }
}

std::vector<Pose3> ReadPosesKitti(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<Pose3> poses;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::istringstream tokens(line);
    std::vector<double> values;
    std::string token;
    while (tokens >> token) {
      try {
        std::size_t consumed = 0;
        values.push_back(std::stod(token, &consumed));
        if (consumed != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw Error("malformed pose line " + std::to_string(line_number));
      }
    }
    if (values.empty()) continue;
    if (values.size() != 12) {
      throw Error("malformed pose line " + std::to_string(line_number));
    }
    Eigen::Matrix3d rotation;
    Eigen::Vector3d translation;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) rotation(r, c) = values[4 * r + c];
      translation(r) = values[4 * r + 3];
    }
    const double deviation =
        (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
            .cwiseAbs()
            .maxCoeff();
    if (!(deviation < kMaxOrthonormalDeviation) || rotation.determinant() <= 0) {
      throw Error("non-orthonormal rotation on pose line " +
                  std::to_string(line_number));
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(
        rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
    rotation = svd.matrixU() * svd.matrixV().transpose();
    poses.emplace_back(rotation, translation);
  }
  return poses;
}

void WritePosesKitti(std::span<const Pose3> trajectory, const fs::path& path) {
  auto out = OpenForWrite(path);
  out << std::setprecision(9);
  for (const Pose3& pose : trajectory) {
    const Eigen::Matrix4d m = pose.Matrix();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) {
        if (r != 0 || c != 0) out << ' ';
        // Avoid "-0" from rounding noise on exact zeros.
        out << (m(r, c) == 0.0 ? 0.0 : m(r, c));
      }
    }
    out << '\n';
  }
  if (!out) throw Error("cannot write " + path.string());
}

void WritePosesTum(std::span<const Pose3> trajectory,
                   std::span<const double> timestamps, const fs::path& path) {
  if (timestamps.size() != trajectory.size()) {
    throw Error("timestamp/trajectory length mismatch");
  }
  auto out = OpenForWrite(path);
  out << std::setprecision(9);
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const auto& t = trajectory[i].translation();
    const auto& q = trajectory[i].rotation();
    out << timestamps[i] << ' ' << t.x() << ' ' << t.y() << ' ' << t.z() << ' '
        << q.x() << ' ' << q.y() << ' ' << q.z() << ' ' << q.w() << '\n';
  }
  if (!out) throw Error("cannot write " + path.string());
}

Pose3 ReadVeloToCamera(const fs::path& calib_path) {
  std::ifstream in(calib_path);
  if (!in) throw Error("cannot open " + calib_path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (!line.starts_with("Tr:")) continue;
    std::istringstream tokens(line.substr(3));
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) {
        if (!(tokens >> m(r, c))) throw Error("malformed Tr entry in calib");
      }
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(
        m.topLeftCorner<3, 3>(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    m.topLeftCorner<3, 3>() = svd.matrixU() * svd.matrixV().transpose();
    return Pose3::FromMatrix(m);
  }
  throw Error("calib file has no Tr entry: " + calib_path.string());
}

std::vector<Pose3> ToCameraFrame(std::span<const Pose3> trajectory,
                                 const Pose3& velo_to_camera) {
  std::vector<Pose3> out;
  out.reserve(trajectory.size());
  const Pose3 camera_to_velo = velo_to_camera.inverse();
  for (const Pose3& pose : trajectory) {
    out.push_back(velo_to_camera * pose * camera_to_velo);
  }
  return out;
}

}  // namespace semslam::io
