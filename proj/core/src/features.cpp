#include "voxdet/features.hpp"

#include <algorithm>
#include <string>

#include "voxdet/errors.hpp"

namespace voxdet {

int PatchSpec::receptive_radius() const {
  validate();
  return scales.back() * patch_radius;
}

void PatchSpec::validate() const {
  if (scales.empty() || scales.front() != 1)
    throw ValidationError("PatchSpec: scales must start at 1");
  for (std::size_t i = 1; i < scales.size(); ++i)
    if (scales[i] <= scales[i - 1])
      throw ValidationError("PatchSpec: scales must be strictly increasing");
  if (patch_radius < 1)
    throw ValidationError("PatchSpec: patch_radius must be positive");
}

FeaturePyramid::FeaturePyramid(const Volume3& volume, PatchSpec spec)
    : spec_(std::move(spec)), base_dims_(volume.dims()) {
  spec_.validate();
  levels_.reserve(spec_.scales.size());
  for (const int scale : spec_.scales) levels_.push_back(downsample_avg(volume, scale));
}

bool FeaturePyramid::in_interior(const Coordinate& pos) const {
  const int r = spec_.receptive_radius();
  return pos.x >= r && pos.y >= r && pos.z >= r && pos.x < base_dims_.nx - r &&
         pos.y < base_dims_.ny - r && pos.z < base_dims_.nz - r;
}

void FeaturePyramid::features_at(const Coordinate& pos, std::span<float> out) const {
  if (!in_interior(pos))
    throw ValidationError("features_at: position (" + std::to_string(pos.x) + "," +
                          std::to_string(pos.y) + "," + std::to_string(pos.z) +
                          ") closer than the receptive radius to a face");
  if (static_cast<std::int64_t>(out.size()) != spec_.feature_dim())
    throw ValidationError("features_at: output span has wrong length");

  const int r = spec_.patch_radius;
  std::size_t k = 0;
  for (std::size_t level = 0; level < levels_.size(); ++level) {
    const Volume3& grid = levels_[level];
    const int scale = spec_.scales[level];
    const int cx = pos.x / scale, cy = pos.y / scale, cz = pos.z / scale;
    for (int dz = -r; dz <= r; ++dz)
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
          out[k++] = grid.at(cx + dx, cy + dy, cz + dz);
  }
}

std::vector<float> FeaturePyramid::features_at(const Coordinate& pos) const {
  std::vector<float> out(static_cast<std::size_t>(spec_.feature_dim()));
  features_at(pos, out);
  return out;
}

std::vector<float> extract_features(const Volume3& volume, const Coordinate& pos,
                                    const PatchSpec& spec) {
  return FeaturePyramid(volume, spec).features_at(pos);
}

}  // namespace voxdet
