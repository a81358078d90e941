#pragma once

#include <optional>
#include <vector>

#include "voxdet/geometry.hpp"

namespace voxdet {

/// An object center, optionally scored. Ground-truth points carry no
/// confidence; detections always do.
struct Point {
  Coordinate pos;
  std::optional<double> confidence;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Ordered list of object centers. Detection sets are sorted by
/// non-increasing confidence (ties keep emission order).
struct PointSet {
  std::vector<Point> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  bool all_have_confidence() const;
  bool none_have_confidence() const;
  bool sorted_by_confidence() const;  // non-increasing; vacuously true if empty

  /// Throws ValidationError unless every point is scored and the list is
  /// sorted by non-increasing confidence. `what` names the offending input.
  void require_detections(const char* what) const;

  friend bool operator==(const PointSet&, const PointSet&) = default;
};

}  // namespace voxdet
