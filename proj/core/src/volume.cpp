#include "voxdet/volume.hpp"

#include <cmath>
#include <string>

#include "voxdet/errors.hpp"

namespace voxdet {

namespace {

void check_dims(const Dims3& dims) {
  if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0)
    throw ValidationError("Volume3: dims must be positive, got (" +
                          std::to_string(dims.nx) + "," + std::to_string(dims.ny) +
                          "," + std::to_string(dims.nz) + ")");
}

void check_voxel_size(double voxel_size_nm) {
  if (!(voxel_size_nm > 0.0))
    throw ValidationError("Volume3: voxel_size_nm must be positive");
}

}  // namespace

Volume3::Volume3(Dims3 dims, float fill, double voxel_size_nm)
    : dims_(dims), voxel_size_nm_(voxel_size_nm) {
  check_dims(dims);
  check_voxel_size(voxel_size_nm);
  data_.assign(static_cast<std::size_t>(dims.voxel_count()), fill);
}

Volume3::Volume3(Dims3 dims, std::vector<float> data, double voxel_size_nm)
    : dims_(dims), voxel_size_nm_(voxel_size_nm), data_(std::move(data)) {
  check_dims(dims);
  check_voxel_size(voxel_size_nm);
  if (static_cast<std::int64_t>(data_.size()) != dims.voxel_count())
    throw ValidationError(
        "Volume3: data length " + std::to_string(data_.size()) +
        " does not match dims product " + std::to_string(dims.voxel_count()));
}

Coordinate Volume3::coordinate_of(std::int64_t index) const {
  const int x = static_cast<int>(index % dims_.nx);
  const std::int64_t rest = index / dims_.nx;
  const int y = static_cast<int>(rest % dims_.ny);
  const int z = static_cast<int>(rest / dims_.ny);
  return {x, y, z};
}

void Volume3::require_finite(const char* context) const {
  for (std::int64_t i = 0; i < size(); ++i) {
    if (!std::isfinite(data_[static_cast<std::size_t>(i)])) {
      const Coordinate c = coordinate_of(i);
      throw ValidationError(std::string(context) + ": non-finite value at (" +
                            std::to_string(c.x) + "," + std::to_string(c.y) + "," +
                            std::to_string(c.z) + ")");
    }
  }
}

Volume3 downsample_avg(const Volume3& volume, int factor) {
  if (factor <= 0)
    throw ValidationError("downsample_avg: factor must be >= 1, got " +
                          std::to_string(factor));
  if (factor == 1) return volume;

  const Dims3 in = volume.dims();
  const Dims3 out_dims = {(in.nx + factor - 1) / factor,
                          (in.ny + factor - 1) / factor,
                          (in.nz + factor - 1) / factor};
  Volume3 out(out_dims, 0.0f, volume.voxel_size_nm());

  for (int z = 0; z < out_dims.nz; ++z) {
    const int z0 = z * factor, z1 = std::min(z0 + factor, in.nz);
    for (int y = 0; y < out_dims.ny; ++y) {
      const int y0 = y * factor, y1 = std::min(y0 + factor, in.ny);
      for (int x = 0; x < out_dims.nx; ++x) {
        const int x0 = x * factor, x1 = std::min(x0 + factor, in.nx);
        double sum = 0.0;
        for (int sz = z0; sz < z1; ++sz)
          for (int sy = y0; sy < y1; ++sy)
            for (int sx = x0; sx < x1; ++sx) sum += volume.at(sx, sy, sz);
        const std::int64_t count = static_cast<std::int64_t>(x1 - x0) *
                                   (y1 - y0) * (z1 - z0);
        out.at(x, y, z) = static_cast<float>(sum / static_cast<double>(count));
      }
    }
  }
  return out;
}

}  // namespace voxdet
