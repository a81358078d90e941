#include "voxdet/points.hpp"

#include <algorithm>
#include <string>

#include "voxdet/errors.hpp"

namespace voxdet {

bool PointSet::all_have_confidence() const {
  return std::all_of(points.begin(), points.end(),
                     [](const Point& p) { return p.confidence.has_value(); });
}

bool PointSet::none_have_confidence() const {
  return std::none_of(points.begin(), points.end(),
                      [](const Point& p) { return p.confidence.has_value(); });
}

bool PointSet::sorted_by_confidence() const {
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!points[i - 1].confidence || !points[i].confidence) return false;
    if (*points[i - 1].confidence < *points[i].confidence) return false;
  }
  return true;
}

void PointSet::require_detections(const char* what) const {
  if (!all_have_confidence())
    throw ValidationError(std::string(what) + ": every detection needs a confidence");
  if (!sorted_by_confidence())
    throw ValidationError(std::string(what) +
                          ": detections must be sorted by non-increasing confidence");
}

}  // namespace voxdet
