#include "semslam/submaps/submap.h"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace semslam::submaps {
namespace {

static_assert(std::endian::native == std::endian::little,
              "submap blobs are written in host (little-endian) order");

constexpr char kMagic[4] = {'S', 'S', 'M', 'P'};
constexpr std::uint32_t kVersion = 1;

class BlobWriter {
 public:
  template <typename T>
  void Put(T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    data_.append(bytes, sizeof(T));
  }
  void PutRaw(const char* bytes, std::size_t n) { data_.append(bytes, n); }
  std::string Take() { return std::move(data_); }

 private:
  std::string data_;
};

class BlobReader {
 public:
  explicit BlobReader(const std::string& data) : data_(data) {}

  template <typename T>
  T Get() {
    if (pos_ + sizeof(T) > data_.size()) throw Error("truncated submap blob");
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  void GetRaw(char* out, std::size_t n) {
    if (pos_ + n > data_.size()) throw Error("truncated submap blob");
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
  }
  bool AtEnd() const { return pos_ == data_.size(); }

 private:
  const std::string& data_;
  std::size_t pos_ = 0;
};

// Labels are 16-bit: fixed palette for the common SemanticKITTI classes,
// hashed colors otherwise.
std::array<std::uint8_t, 3> LabelColor(Label label) {
  switch (label) {
    case kitti_labels::kCar: return {100, 150, 245};
    case kitti_labels::kTruck: return {80, 30, 180};
    case kitti_labels::kRoad: return {255, 0, 255};
    case kitti_labels::kSidewalk: return {75, 0, 75};
    case kitti_labels::kBuilding: return {255, 200, 0};
    case kitti_labels::kVegetation: return {0, 175, 0};
    case kitti_labels::kTerrain: return {150, 240, 80};
    case kitti_labels::kPole: return {255, 240, 150};
    case kitti_labels::kTrafficSign: return {255, 0, 0};
    default: break;
  }
  const std::uint32_t h = label * 2654435761u;
  return {static_cast<std::uint8_t>(h >> 24), static_cast<std::uint8_t>(h >> 16),
          static_cast<std::uint8_t>(h >> 8)};
}

}  // namespace

bool ProjectToGridPlane(const Eigen::Vector3d& sensor_point,
                        const Pose3& sensor_pose, const Pose3& local_pose,
                        const SubmapOptions& options, Eigen::Vector2d* out) {
  const Eigen::Vector3d world = sensor_pose * sensor_point;
  const Eigen::Vector3d offset = world - sensor_pose.translation();
  if (offset.z() < options.min_height || offset.z() > options.max_height) {
    return false;
  }
  if (offset.head<2>().norm() > options.max_range) return false;
  *out = (local_pose.inverse() * world).head<2>();
  return true;
}

Submap::Submap(const Pose3& local_pose, const SubmapOptions& options)
    : options_(options), grid_(options.resolution, local_pose) {}

Submap::Submap(SemanticGrid grid, const SubmapOptions& options)
    : options_(options), grid_(std::move(grid)) {}

void Submap::InsertScan(const Scan& scan, const Pose3& pose) {
  if (finished_) throw Error("cannot insert into a finished submap");
  const Eigen::Vector2d origin =
      (grid_.local_pose().inverse() * pose.translation()).head<2>();
  Eigen::Vector2d endpoint;
  for (const auto& point : scan.points) {
    if (!ProjectToGridPlane(point.position, pose, grid_.local_pose(), options_,
                            &endpoint)) {
      continue;
    }
    grid_.InsertRay(origin, endpoint, point.label);
  }
  if (scan_range_.first < 0) scan_range_.first = scan.index;
  scan_range_.second = std::max(scan_range_.second, scan.index);
  ++num_scans_;
}

Submap Submap::FromParts(SemanticGrid grid, const SubmapOptions& options,
                         std::pair<std::int64_t, std::int64_t> scan_range,
                         int num_scans, bool finished) {
  Submap submap(std::move(grid), options);
  submap.scan_range_ = scan_range;
  submap.num_scans_ = num_scans;
  submap.finished_ = finished;
  return submap;
}

std::string SerializeSubmap(const Submap& submap) {
  const SemanticGrid& grid = submap.grid();
  BlobWriter w;
  w.PutRaw(kMagic, sizeof(kMagic));
  w.Put(kVersion);
  w.Put(grid.resolution());
  w.Put<std::int32_t>(grid.min_index().x());
  w.Put<std::int32_t>(grid.min_index().y());
  w.Put<std::int32_t>(grid.size().x());
  w.Put<std::int32_t>(grid.size().y());
  const auto& t = grid.local_pose().translation();
  const auto& q = grid.local_pose().rotation();
  for (double v : {t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w()}) w.Put(v);
  w.Put<std::int64_t>(submap.scan_range().first);
  w.Put<std::int64_t>(submap.scan_range().second);
  w.Put<std::int32_t>(submap.num_scans());
  w.Put<std::uint8_t>(submap.finished() ? 1 : 0);
  w.Put(submap.options().min_height);
  w.Put(submap.options().max_height);
  w.Put(submap.options().max_range);

  // Payload: (u32 run of empty cells, then one non-empty cell) repeated.
  const auto& cells = grid.cells();
  std::size_t i = 0;
  while (i < cells.size()) {
    std::uint32_t run = 0;
    while (i < cells.size() && cells[i].empty()) {
      ++run;
      ++i;
    }
    w.Put(run);
    if (i == cells.size()) break;
    const GridCell& cell = cells[i++];
    w.Put(cell.misses);
    w.Put(static_cast<std::uint16_t>(cell.hits.size()));
    for (const auto& h : cell.hits) {
      w.Put(h.label);
      w.Put(h.count);
    }
  }
  return w.Take();
}

Submap DeserializeSubmap(const std::string& blob) {
  BlobReader r(blob);
  char magic[4];
  r.GetRaw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error("not a submap blob");
  const auto version = r.Get<std::uint32_t>();
  if (version != kVersion) {
    throw Error("unsupported submap version " + std::to_string(version));
  }
  const double resolution = r.Get<double>();
  Eigen::Vector2i min_index, size;
  min_index.x() = r.Get<std::int32_t>();
  min_index.y() = r.Get<std::int32_t>();
  size.x() = r.Get<std::int32_t>();
  size.y() = r.Get<std::int32_t>();
  double p[7];
  for (double& v : p) v = r.Get<double>();
  const Pose3 local_pose(Eigen::Quaterniond(p[6], p[3], p[4], p[5]),
                         Eigen::Vector3d(p[0], p[1], p[2]));
  std::pair<std::int64_t, std::int64_t> scan_range;
  scan_range.first = r.Get<std::int64_t>();
  scan_range.second = r.Get<std::int64_t>();
  const int num_scans = r.Get<std::int32_t>();
  const bool finished = r.Get<std::uint8_t>() != 0;
  SubmapOptions options;
  options.resolution = resolution;
  options.min_height = r.Get<double>();
  options.max_height = r.Get<double>();
  options.max_range = r.Get<double>();

  if (size.x() < 0 || size.y() < 0) throw Error("corrupt submap dimensions");
  const std::size_t total = static_cast<std::size_t>(size.x()) * size.y();
  std::vector<GridCell> cells(total);
  std::size_t i = 0;
  while (i < total) {
    const auto run = r.Get<std::uint32_t>();
    if (run > total - i) throw Error("corrupt submap run length");
    i += run;
    if (i == total) break;
    GridCell& cell = cells[i++];
    cell.misses = r.Get<std::uint32_t>();
    const auto n = r.Get<std::uint16_t>();
    cell.hits.reserve(n);
    for (std::uint16_t k = 0; k < n; ++k) {
      const auto label = r.Get<Label>();
      const auto count = r.Get<std::uint32_t>();
      cell.hits.push_back({label, count});
    }
  }
  if (!r.AtEnd()) throw Error("trailing bytes in submap blob");
  return Submap::FromParts(SemanticGrid::FromParts(resolution, local_pose,
                                                   min_index, size,
                                                   std::move(cells)),
                           options, scan_range, num_scans, finished);
}

void WriteSubmap(const Submap& submap, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  const std::string blob = SerializeSubmap(submap);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw Error("cannot write " + path.string());
}

Submap ReadSubmap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const std::string blob((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  return DeserializeSubmap(blob);
}

void WriteDominantLabelImage(const SemanticGrid& grid,
                             const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  const int w = grid.size().x();
  const int h = grid.size().y();
  out << "P6\n" << w << ' ' << h << "\n255\n";
  // Image rows run top-down, grid y grows upwards.
  for (int y = h - 1; y >= 0; --y) {
    for (int x = 0; x < w; ++x) {
      const GridCell& cell =
          grid.cells()[static_cast<std::size_t>(y) * w + x];
      std::array<std::uint8_t, 3> rgb{128, 128, 128};
      if (!cell.hits.empty()) {
        rgb = LabelColor(DominantLabelOf(cell).label);
      } else if (cell.misses > 0) {
        rgb = {255, 255, 255};
      }
      out.write(reinterpret_cast<const char*>(rgb.data()), 3);
    }
  }
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace semslam::submaps
