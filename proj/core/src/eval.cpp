#include "voxdet/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <system_error>
#include <vector>

#include "voxdet/errors.hpp"
#include "voxdet/geometry.hpp"

namespace voxdet {

namespace {

namespace fs = std::filesystem;

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v) {
  char buf[64];
  const std::to_chars_result res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void check_match_radius(double r_match, const char* what) {
  if (r_match < 0.0 || !std::isfinite(r_match))
    throw ValidationError(std::string(what) +
                          ": match radius must be non-negative and finite");
}

void write_text_file(const fs::path& path, const std::string& text, const char* what) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(std::string(what) + ": cannot open " + path.string() +
                          " for writing");
  out << text;
  if (!out) throw IoError(std::string(what) + ": write failed for " + path.string());
}

}  // namespace

MatchResult match_detections(const PointSet& detections, const PointSet& ground_truth,
                             double r_match) {
  check_match_radius(r_match, "match_detections");
  detections.require_detections("match_detections: detections");
  if (!ground_truth.none_have_confidence())
    throw ValidationError("match_detections: ground truth must be unscored");

  const double r_squared = r_match * r_match;
  std::vector<bool> taken(ground_truth.size(), false);
  MatchResult result;
  for (std::size_t d = 0; d < detections.size(); ++d) {
    std::int64_t best_d2 = -1;
    int best_gt = -1;
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (taken[g]) continue;
      const std::int64_t d2 =
          squared_distance(detections.points[d].pos, ground_truth.points[g].pos);
      if (static_cast<double>(d2) > r_squared) continue;
      if (best_gt < 0 || d2 < best_d2) {  // ties keep the smaller gt index
        best_d2 = d2;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0) {
      taken[static_cast<std::size_t>(best_gt)] = true;
      result.tp.emplace_back(static_cast<int>(d), best_gt);
    } else {
      result.fp.push_back(static_cast<int>(d));
    }
  }
  for (std::size_t g = 0; g < ground_truth.size(); ++g)
    if (!taken[g]) result.fn.push_back(static_cast<int>(g));
  return result;
}

PrCurve pr_curve(const std::vector<PointSet>& detections_per_volume,
                 const std::vector<PointSet>& ground_truth_per_volume,
                 double r_match) {
  check_match_radius(r_match, "pr_curve");
  if (detections_per_volume.size() != ground_truth_per_volume.size())
    throw ValidationError("pr_curve: got " +
                          std::to_string(detections_per_volume.size()) +
                          " detection sets for " +
                          std::to_string(ground_truth_per_volume.size()) +
                          " ground-truth sets");

  // Greedy matching processes detections in confidence order and never
  // revisits a decision, so the matching of the detections kept at threshold
  // tau is exactly the first-k prefix of the full matching. One pass per
  // volume therefore yields the whole sweep: pool (confidence, matched) over
  // all volumes and accumulate.
  std::int64_t total_gt = 0;
  struct Scored {
    double confidence;
    bool matched;
  };
  std::vector<Scored> pooled;
  for (std::size_t v = 0; v < detections_per_volume.size(); ++v) {
    const PointSet& dets = detections_per_volume[v];
    const PointSet& gts = ground_truth_per_volume[v];
    total_gt += static_cast<std::int64_t>(gts.size());
    const MatchResult match = match_detections(dets, gts, r_match);
    std::vector<bool> is_tp(dets.size(), false);
    for (const auto& [det_index, gt_index] : match.tp)
      is_tp[static_cast<std::size_t>(det_index)] = true;
    for (std::size_t d = 0; d < dets.size(); ++d)
      pooled.push_back(Scored{*dets.points[d].confidence, is_tp[d]});
  }
  if (total_gt == 0)
    throw ValidationError("pr_curve: no ground-truth points to evaluate against");

  std::sort(pooled.begin(), pooled.end(), [](const Scored& a, const Scored& b) {
    return a.confidence > b.confidence;
  });

  PrCurve curve;
  curve.match_radius = r_match;
  curve.rows.push_back(PrRow{std::numeric_limits<double>::infinity(), 1.0, 0.0, 0, 0,
                             total_gt});

  std::int64_t tp = 0;
  std::int64_t kept = 0;
  std::size_t i = 0;
  while (i < pooled.size()) {
    const double threshold = pooled[i].confidence;
    // Consume every detection sharing this confidence: the sweep is over
    // "confidence >= threshold", so equal scores enter together.
    while (i < pooled.size() && pooled[i].confidence == threshold) {
      tp += pooled[i].matched ? 1 : 0;
      ++kept;
      ++i;
    }
    PrRow row;
    row.threshold = threshold;
    row.tp = tp;
    row.fp = kept - tp;
    row.fn = total_gt - tp;
    row.precision = static_cast<double>(tp) / static_cast<double>(kept);
    row.recall = static_cast<double>(tp) / static_cast<double>(total_gt);
    curve.rows.push_back(row);
  }
  return curve;
}

double average_precision(const PrCurve& curve) {
  if (curve.rows.empty())
    throw ValidationError("average_precision: curve has no rows");
  double ap = 0.0;
  double prev_recall = 0.0;
  for (const PrRow& row : curve.rows) {
    ap += (row.recall - prev_recall) * row.precision;
    prev_recall = row.recall;
  }
  return ap;
}

double precision_at_recall(const PrCurve& curve, double min_recall) {
  if (curve.rows.empty())
    throw ValidationError("precision_at_recall: curve has no rows");
  double best = 0.0;
  for (const PrRow& row : curve.rows)
    if (row.recall >= min_recall) best = std::max(best, row.precision);
  return best;
}

void write_pr_csv(const PrCurve& curve, const fs::path& path) {
  std::string text = "threshold,precision,recall,tp,fp,fn\n";
  for (const PrRow& row : curve.rows) {
    text += format_double(row.threshold);
    text += ',';
    text += format_double(row.precision);
    text += ',';
    text += format_double(row.recall);
    text += ',';
    text += std::to_string(row.tp);
    text += ',';
    text += std::to_string(row.fp);
    text += ',';
    text += std::to_string(row.fn);
    text += '\n';
  }
  write_text_file(path, text, "write_pr_csv");
}

void write_pr_svg(const PrCurve& curve, const fs::path& path) {
  if (curve.rows.empty()) throw ValidationError("write_pr_svg: curve has no rows");

  constexpr double kWidth = 640.0;
  constexpr double kHeight = 480.0;
  constexpr double kLeft = 60.0;
  constexpr double kRight = 20.0;
  constexpr double kTop = 20.0;
  constexpr double kBottom = 50.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  const auto x_of = [&](double recall) { return kLeft + recall * plot_w; };
  const auto y_of = [&](double precision) {
    return kTop + (1.0 - precision) * plot_h;
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n";
  svg += "  <rect width=\"640\" height=\"480\" fill=\"white\"/>\n";

  // Grid and tick labels every 0.1 on both axes.
  for (int t = 0; t <= 10; ++t) {
    const double f = t / 10.0;
    const std::string label = (t == 10) ? "1" : (t == 0 ? "0" : "0." + std::to_string(t));
    svg += "  <line x1=\"" + format_double(x_of(f)) + "\" y1=\"" +
           format_double(kTop) + "\" x2=\"" + format_double(x_of(f)) + "\" y2=\"" +
           format_double(kTop + plot_h) + "\" stroke=\"#dddddd\"/>\n";
    svg += "  <line x1=\"" + format_double(kLeft) + "\" y1=\"" +
           format_double(y_of(f)) + "\" x2=\"" + format_double(kLeft + plot_w) +
           "\" y2=\"" + format_double(y_of(f)) + "\" stroke=\"#dddddd\"/>\n";
    svg += "  <text x=\"" + format_double(x_of(f)) + "\" y=\"" +
           format_double(kTop + plot_h + 18.0) +
           "\" font-size=\"12\" text-anchor=\"middle\">" + label + "</text>\n";
    svg += "  <text x=\"" + format_double(kLeft - 8.0) + "\" y=\"" +
           format_double(y_of(f) + 4.0) +
           "\" font-size=\"12\" text-anchor=\"end\">" + label + "</text>\n";
  }

  svg += "  <rect x=\"" + format_double(kLeft) + "\" y=\"" + format_double(kTop) +
         "\" width=\"" + format_double(plot_w) + "\" height=\"" +
         format_double(plot_h) + "\" fill=\"none\" stroke=\"black\"/>\n";
  svg += "  <text x=\"" + format_double(kLeft + plot_w / 2.0) + "\" y=\"" +
         format_double(kHeight - 10.0) +
         "\" font-size=\"14\" text-anchor=\"middle\">recall</text>\n";
  svg += "  <text x=\"16\" y=\"" + format_double(kTop + plot_h / 2.0) +
         "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         format_double(kTop + plot_h / 2.0) + ")\">precision</text>\n";

  std::string polyline;
  for (const PrRow& row : curve.rows) {
    if (!polyline.empty()) polyline += ' ';
    polyline += format_double(x_of(row.recall)) + "," + format_double(y_of(row.precision));
  }
  svg += "  <polyline points=\"" + polyline +
         "\" fill=\"none\" stroke=\"#1f6feb\" stroke-width=\"2\"/>\n";
  for (const PrRow& row : curve.rows)
    svg += "  <circle cx=\"" + format_double(x_of(row.recall)) + "\" cy=\"" +
           format_double(y_of(row.precision)) + "\" r=\"2.5\" fill=\"#1f6feb\"/>\n";
  svg += "</svg>\n";

  write_text_file(path, svg, "write_pr_svg");
}

}  // namespace voxdet
