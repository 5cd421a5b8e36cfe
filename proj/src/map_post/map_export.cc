#include "semslam/map_post/map_export.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "semslam/local_map/voxel_hash.h"
#include "semslam/preprocessing/preprocessing.h"

namespace semslam::map_post {
namespace {

struct PlyProperty {
  std::string type;
  std::string name;
};

std::size_t TypeSize(const std::string& type) {
  if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
  if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
  if (type == "int" || type == "uint" || type == "float" || type == "int32" ||
      type == "uint32" || type == "float32") {
    return 4;
  }
  if (type == "double" || type == "float64") return 8;
  throw Error("unsupported PLY property type " + type);
}

double DecodeBinary(const char* bytes, const std::string& type) {
  auto get = [bytes]<typename T>(T) {
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return static_cast<double>(v);
  };
  if (type == "char" || type == "int8") return get(std::int8_t{});
  if (type == "uchar" || type == "uint8") return get(std::uint8_t{});
  if (type == "short" || type == "int16") return get(std::int16_t{});
  if (type == "ushort" || type == "uint16") return get(std::uint16_t{});
  if (type == "int" || type == "int32") return get(std::int32_t{});
  if (type == "uint" || type == "uint32") return get(std::uint32_t{});
  if (type == "float" || type == "float32") return get(float{});
  return get(double{});
}

void Assign(LabeledPoint& p, const std::string& name, double value) {
  if (name == "x") p.position.x() = value;
  else if (name == "y") p.position.y() = value;
  else if (name == "z") p.position.z() = value;
  else if (name == "label") p.label = static_cast<Label>(value);
  else if (name == "confidence") p.confidence = value;
}

}  // namespace

MapAggregator::MapAggregator(double voxel_size, std::set<Label> exclude)
    : voxel_size_(voxel_size), exclude_(std::move(exclude)) {
  if (!(voxel_size > 0.0)) throw ConfigError("export voxel must be positive");
}

void MapAggregator::Add(const Scan& scan, const Pose3& pose) {
  for (const auto& point : scan.points) {
    if (exclude_.contains(point.label)) continue;
    LabeledPoint world = point;
    world.position = pose * point.position;
    if (occupied_.insert(preprocessing::VoxelKey(world.position, voxel_size_)).second) {
      points_.push_back(world);
    }
  }
}

std::vector<LabeledPoint> AggregateMap(const std::vector<Scan>& scans,
                                       const std::vector<Pose3>& poses,
                                       double voxel_size,
                                       const std::set<Label>& exclude) {
  if (scans.size() != poses.size()) {
    throw Error("scan/pose count mismatch");
  }
  MapAggregator aggregator(voxel_size, exclude);
  for (std::size_t i = 0; i < scans.size(); ++i) aggregator.Add(scans[i], poses[i]);
  return aggregator.TakePoints();
}

std::vector<LabeledPoint> FilterLabels(const std::vector<LabeledPoint>& points,
                                       const std::set<Label>& exclude) {
  std::vector<LabeledPoint> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    if (!exclude.contains(p.label)) out.push_back(p);
  }
  return out;
}

void ExportPly(const std::vector<LabeledPoint>& points,
               const std::filesystem::path& path, PlyFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "ply\n"
      << (format == PlyFormat::kAscii ? "format ascii 1.0\n"
                                      : "format binary_little_endian 1.0\n")
      << "element vertex " << points.size() << '\n'
      << "property float x\nproperty float y\nproperty float z\n"
      << "property ushort label\nproperty float confidence\nend_header\n";
  if (format == PlyFormat::kAscii) {
    out.precision(9);
    for (const auto& p : points) {
      out << static_cast<float>(p.position.x()) << ' '
          << static_cast<float>(p.position.y()) << ' '
          << static_cast<float>(p.position.z()) << ' ' << p.label << ' '
          << static_cast<float>(p.confidence) << '\n';
    }
  } else {
    static_assert(std::endian::native == std::endian::little);
    for (const auto& p : points) {
      const float xyz[3] = {static_cast<float>(p.position.x()),
                            static_cast<float>(p.position.y()),
                            static_cast<float>(p.position.z())};
      const float confidence = static_cast<float>(p.confidence);
      out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
      out.write(reinterpret_cast<const char*>(&p.label), sizeof(p.label));
      out.write(reinterpret_cast<const char*>(&confidence), sizeof(confidence));
    }
  }
  if (!out) throw Error("cannot write " + path.string());
}

std::vector<LabeledPoint> ReadPly(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "ply") throw Error("not a PLY file");

  bool binary = false;
  std::size_t count = 0;
  bool in_vertex = false;
  std::vector<PlyProperty> props;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    if (key == "end_header") break;
    if (key == "format") {
      std::string fmt;
      fields >> fmt;
      if (fmt == "binary_little_endian") binary = true;
      else if (fmt != "ascii") throw Error("unsupported PLY format " + fmt);
    } else if (key == "element") {
      std::string name;
      fields >> name;
      in_vertex = name == "vertex";
      if (in_vertex) fields >> count;
    } else if (key == "property" && in_vertex) {
      PlyProperty p;
      fields >> p.type >> p.name;
      if (p.type == "list") throw Error("list properties are not supported");
      props.push_back(p);
    }
  }
  if (!in) throw Error("truncated PLY header");

  std::vector<LabeledPoint> points(count);
  if (binary) {
    std::size_t stride = 0;
    for (const auto& p : props) stride += TypeSize(p.type);
    std::vector<char> record(stride);
    for (auto& point : points) {
      if (!in.read(record.data(), static_cast<std::streamsize>(stride))) {
        throw Error("truncated PLY body");
      }
      std::size_t offset = 0;
      for (const auto& p : props) {
        Assign(point, p.name, DecodeBinary(record.data() + offset, p.type));
        offset += TypeSize(p.type);
      }
    }
  } else {
    for (auto& point : points) {
      if (!std::getline(in, line)) throw Error("truncated PLY body");
      std::istringstream fields(line);
      for (const auto& p : props) {
        double v;
        if (!(fields >> v)) throw Error("malformed PLY vertex line");
        Assign(point, p.name, v);
      }
    }
  }
  return points;
}

void ExportCsv(const std::vector<LabeledPoint>& points,
               const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "x,y,z,label\n";
  out.precision(9);
  for (const auto& p : points) {
    out << p.position.x() << ',' << p.position.y() << ',' << p.position.z() << ','
        << p.label << '\n';
  }
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace semslam::map_post
