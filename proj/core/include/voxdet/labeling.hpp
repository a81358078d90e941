#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "voxdet/points.hpp"
#include "voxdet/volume.hpp"

namespace voxdet {

struct LabelingConfig {
  /// Inclusive radius (voxels): a voxel is positive iff it lies within r_l of
  /// some object center.
  double r_l = 7.0;
  /// Samples keep at least this margin from every volume face. Callers
  /// normally pass the classifier's receptive radius; the default matches
  /// the default PatchSpec.
  int border_margin = 8;
  /// Negatives drawn per positive.
  double negative_ratio = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// A voxel position with its binary class.
struct LabeledSample {
  Coordinate position;
  int label = 0;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

/// Voxel-wise label mask from object centers: voxel i gets 1.0 iff
/// distance(i, s_j) <= r_l for some center s_j, else 0.0. Implemented by
/// stamping a ball around each point; contractually identical to the
/// per-voxel definition.
Volume3 make_label_volume(const PointSet& points, Dims3 dims, double r_l);

/// Class-balanced training draw: every positive interior voxel (scan order),
/// followed by floor(negative_ratio * #positives) interior negatives sampled
/// uniformly without replacement (all of them if fewer exist). Deterministic
/// under config.seed. Throws if the interior holds no positive voxel.
std::vector<LabeledSample> sample_balanced(const Volume3& labels,
                                           const LabelingConfig& config);

/// Debug export: JSON array of {"x","y","z","label"} rows.
void save_samples(const std::vector<LabeledSample>& samples,
                  const std::filesystem::path& path);

}  // namespace voxdet
