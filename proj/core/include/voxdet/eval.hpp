#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "voxdet/points.hpp"

namespace voxdet {

/// One-to-one assignment of detections to ground truth. Every detection
/// appears exactly once across tp/fp; every ground-truth index exactly once
/// across tp/fn.
struct MatchResult {
  std::vector<std::pair<int, int>> tp;  // (detection index, ground-truth index)
  std::vector<int> fp;                  // unmatched detection indices
  std::vector<int> fn;                  // unmatched ground-truth indices
};

struct PrRow {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

/// Precision-recall sweep, rows ordered by descending threshold starting at
/// the +inf sentinel (no detections kept).
struct PrCurve {
  std::vector<PrRow> rows;
  double match_radius = 30.0;
};

/// Greedy confidence-ordered matching: each detection, in list order, takes
/// the nearest still-unmatched ground-truth point within r_match (inclusive;
/// exact distance ties go to the smaller ground-truth index). Detections must
/// be scored and sorted by non-increasing confidence.
MatchResult match_detections(const PointSet& detections, const PointSet& ground_truth,
                             double r_match);

/// Pooled curve over paired per-volume detection/ground-truth sets: one row
/// per distinct confidence (plus the sentinel), counts summed across volumes
/// before computing precision = tp/(tp+fp) (1 when no detections) and
/// recall = tp/(tp+fn).
PrCurve pr_curve(const std::vector<PointSet>& detections_per_volume,
                 const std::vector<PointSet>& ground_truth_per_volume,
                 double r_match);

/// Area under the precision-recall steps, integrating precision over recall
/// increments in threshold order.
double average_precision(const PrCurve& curve);

/// Highest precision among rows reaching at least `min_recall`; 0 if none do.
double precision_at_recall(const PrCurve& curve, double min_recall);

/// CSV with header `threshold,precision,recall,tp,fp,fn`, shortest
/// round-trip decimals, one row per threshold (sentinel prints "inf").
void write_pr_csv(const PrCurve& curve, const std::filesystem::path& path);

/// Standalone SVG line plot, recall on x and precision on y, both in [0, 1],
/// axis ticks every 0.1.
void write_pr_svg(const PrCurve& curve, const std::filesystem::path& path);

}  // namespace voxdet
