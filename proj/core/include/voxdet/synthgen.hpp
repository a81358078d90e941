#pragma once

#include <cstdint>

#include "voxdet/points.hpp"
#include "voxdet/volume.hpp"

namespace voxdet {

/// Synthetic fixture: anisotropic Gaussian bumps in clamped Gaussian noise.
struct SynthConfig {
  Dims3 dims = {96, 96, 96};
  int n_objects = 8;
  /// Bump extent; rendered with sigma = object_radius / 2, one axis
  /// elongated by 1.8x (seeded choice among the three axes).
  double object_radius = 3.0;
  double object_intensity = 1.0;
  double background_noise_std = 0.1;
  /// Pairwise center distance. Keep above the downstream NMS radius,
  /// otherwise one detection's suppression ball erases its neighbor's peak.
  double min_separation = 28.0;
  /// Centers keep this margin from every face (classifier receptive radius
  /// plus object radius for the defaults).
  int border_clearance = 11;
  std::uint64_t seed = 0;

  /// min_separation must exceed 2*object_radius; dims must admit placement.
  void validate() const;
};

struct SynthVolume {
  Volume3 volume;
  PointSet ground_truth;  // centers in placement order, no confidences
};

/// Deterministic generation: rejection-sample centers uniformly over the
/// border-cleared interior at pairwise distance >= min_separation, render
/// each bump, add i.i.d. Gaussian noise, clamp to [0, 2]. Throws
/// InfeasibleConfigError once the attempt budget (1000 * n_objects) is
/// exhausted.
SynthVolume generate(const SynthConfig& config);

}  // namespace voxdet
