#pragma once

#include <cstdint>
#include <optional>

#include "voxdet/points.hpp"
#include "voxdet/volume.hpp"

namespace voxdet {

/// Window shape for prediction averaging. The Euclidean ball is the default;
/// the cube window exists for ablation and uses an integral-volume fast path.
enum class AveragingWindow { kBall, kCube };

struct PostprocConfig {
  double r_a = 7.0;
  double r_n = 21.0;
  double confidence_floor = 1e-6;                // in [0, 1)
  std::optional<std::int64_t> max_detections;    // unbounded if absent
  AveragingWindow window = AveragingWindow::kBall;

  /// Throws on out-of-range fields; warns (stderr) if r_n < r_a.
  void validate() const;
};

/// Local mean of `pred` over the radius-r_a window around every voxel,
/// normalized by the in-bounds window voxel count. Output dims unchanged.
/// Bit-identical for any thread count.
Volume3 average_predictions(const Volume3& pred, double r_a,
                            AveragingWindow window = AveragingWindow::kBall,
                            int threads = 1);

/// Iterative non-maximum suppression over an averaged prediction map:
/// repeatedly take the global maximum (ties: smallest linear index), emit it
/// as a detection with the map value as confidence, zero the map within r_n
/// (inclusive), and stop once the maximum drops to confidence_floor or below
/// or max_detections is reached. Detections come back in emission order,
/// confidences non-increasing. Warns if the map leaves [0, 1].
PointSet nms_detect(const Volume3& averaged, const PostprocConfig& config);

/// Detections with confidence >= tau; on a sorted detection set this is a
/// prefix, and order is preserved either way.
PointSet threshold_detections(const PointSet& detections, double tau);

}  // namespace voxdet
