#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

namespace semslam::local_map {

// Spatial hash over integer voxel coordinates (Teschner et al. primes).
struct VoxelHash {
  std::size_t operator()(const Eigen::Vector3i& voxel) const {
    const auto x = static_cast<std::uint32_t>(voxel.x());
    const auto y = static_cast<std::uint32_t>(voxel.y());
    const auto z = static_cast<std::uint32_t>(voxel.z());
    return static_cast<std::size_t>((x * 73856093u) ^ (y * 19349669u) ^
                                    (z * 83492791u));
  }
};

}  // namespace semslam::local_map
