#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "voxdet/geometry.hpp"

namespace voxdet {

inline constexpr double kDefaultVoxelSizeNm = 10.0;

struct Dims3 {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  friend constexpr bool operator==(const Dims3&, const Dims3&) = default;

  constexpr std::int64_t voxel_count() const {
    return static_cast<std::int64_t>(nx) * ny * nz;
  }
};

/// Dense 3D scalar grid: one 32-bit float per voxel, x-fastest linearization
/// (index = x + nx*(y + ny*z)). Used for raw images, binary label masks and
/// real-valued prediction maps alike. Treat instances as immutable once
/// handed out; all grid operations return new volumes.
class Volume3 {
 public:
  Volume3() = default;
  explicit Volume3(Dims3 dims, float fill = 0.0f,
                   double voxel_size_nm = kDefaultVoxelSizeNm);
  Volume3(Dims3 dims, std::vector<float> data,
          double voxel_size_nm = kDefaultVoxelSizeNm);

  const Dims3& dims() const { return dims_; }
  int nx() const { return dims_.nx; }
  int ny() const { return dims_.ny; }
  int nz() const { return dims_.nz; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  double voxel_size_nm() const { return voxel_size_nm_; }

  std::int64_t index(int x, int y, int z) const {
    return x + static_cast<std::int64_t>(dims_.nx) *
                   (y + static_cast<std::int64_t>(dims_.ny) * z);
  }
  std::int64_t index(const Coordinate& c) const { return index(c.x, c.y, c.z); }
  Coordinate coordinate_of(std::int64_t index) const;

  bool contains(const Coordinate& c) const {
    return c.x >= 0 && c.y >= 0 && c.z >= 0 && c.x < dims_.nx &&
           c.y < dims_.ny && c.z < dims_.nz;
  }

  float at(int x, int y, int z) const { return data_[index(x, y, z)]; }
  float& at(int x, int y, int z) { return data_[index(x, y, z)]; }
  float at(const Coordinate& c) const { return data_[index(c)]; }
  float operator[](std::int64_t i) const { return data_[i]; }
  float& operator[](std::int64_t i) { return data_[i]; }

  std::span<const float> values() const { return data_; }
  std::span<float> values() { return data_; }

  /// Throws ValidationError if any stored value is NaN or infinite.
  void require_finite(const char* context) const;

  friend bool operator==(const Volume3&, const Volume3&) = default;

 private:
  Dims3 dims_;
  double voxel_size_nm_ = kDefaultVoxelSizeNm;
  std::vector<float> data_;
};

/// Block-average downsampling. Output dims are ceil(dims/factor); each output
/// voxel is the mean of the (up to factor^3, clipped at the upper borders)
/// source voxels it covers. factor == 1 returns the input unchanged.
Volume3 downsample_avg(const Volume3& volume, int factor);

}  // namespace voxdet
