#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "voxdet/volume.hpp"

namespace voxdet {

/// Multi-scale patch geometry for voxel-wise features: at every scale s the
/// feature vector takes the raw (2*patch_radius+1)^3 cube around the position
/// mapped into the factor-s downsampled volume. Cubes are concatenated in
/// scale order, x-fastest within each cube.
struct PatchSpec {
  std::vector<int> scales = {1, 2, 4};
  int patch_radius = 2;

  int patch_side() const { return 2 * patch_radius + 1; }
  std::int64_t patch_volume() const {
    const std::int64_t side = patch_side();
    return side * side * side;
  }
  std::int64_t feature_dim() const {
    return static_cast<std::int64_t>(scales.size()) * patch_volume();
  }
  /// Margin a position must keep from every face for a full in-bounds patch.
  int receptive_radius() const;

  /// scales must be strictly increasing and start at 1; patch_radius >= 1.
  void validate() const;

  friend bool operator==(const PatchSpec&, const PatchSpec&) = default;
};

/// Downsampled copies of one volume, built once and reused for every feature
/// read. Positions map to level coordinates by integer division.
class FeaturePyramid {
 public:
  FeaturePyramid(const Volume3& volume, PatchSpec spec);

  const PatchSpec& spec() const { return spec_; }
  const Dims3& base_dims() const { return base_dims_; }

  /// True iff `pos` keeps receptive_radius from every face.
  bool in_interior(const Coordinate& pos) const;

  /// Raw multi-scale patch features at `pos`. `out` must hold feature_dim()
  /// values. Throws if pos is closer than receptive_radius to a face.
  void features_at(const Coordinate& pos, std::span<float> out) const;
  std::vector<float> features_at(const Coordinate& pos) const;

 private:
  PatchSpec spec_;
  Dims3 base_dims_;
  std::vector<Volume3> levels_;  // one per scale, scale 1 included
};

/// One-off feature read; builds the pyramid internally. Prefer FeaturePyramid
/// when reading many positions of the same volume.
std::vector<float> extract_features(const Volume3& volume, const Coordinate& pos,
                                    const PatchSpec& spec);

/// Row-major dense feature matrix (one row per sample).
struct FeatureMatrix {
  std::int64_t cols = 0;
  std::vector<float> data;

  std::int64_t rows() const {
    return cols == 0 ? 0 : static_cast<std::int64_t>(data.size()) / cols;
  }
  std::span<const float> row(std::int64_t r) const {
    return {data.data() + r * cols, static_cast<std::size_t>(cols)};
  }
};

}  // namespace voxdet
