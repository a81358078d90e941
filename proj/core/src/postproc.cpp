#include "voxdet/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <queue>
#include <string>
#include <vector>

#include "voxdet/errors.hpp"
#include "voxdet/geometry.hpp"
#include "voxdet/parallel.hpp"

namespace voxdet {

namespace {

/// Inclusive prefix-sum cube over a volume, in double; sum(x<=X, y<=Y, z<=Z).
/// Built once and shared read-only, so the windowed pass stays bit-identical
/// for any thread count.
struct IntegralVolume {
  Dims3 dims;
  std::vector<double> table;

  explicit IntegralVolume(const Volume3& v) : dims(v.dims()) {
    table.assign(static_cast<std::size_t>(dims.voxel_count()), 0.0);
    const auto at = [&](int x, int y, int z) -> double& {
      return table[static_cast<std::size_t>(
          x + static_cast<std::int64_t>(dims.nx) *
                  (y + static_cast<std::int64_t>(dims.ny) * z))];
    };
    for (int z = 0; z < dims.nz; ++z)
      for (int y = 0; y < dims.ny; ++y) {
        double row = 0.0;
        for (int x = 0; x < dims.nx; ++x) {
          row += v.at(x, y, z);
          double s = row;
          if (y > 0) s += at(x, y - 1, z);
          if (z > 0) s += at(x, y, z - 1);
          if (y > 0 && z > 0) s -= at(x, y - 1, z - 1);
          at(x, y, z) = s;
        }
      }
  }

  /// Sum over the inclusive box [x0..x1] x [y0..y1] x [z0..z1].
  double box_sum(int x0, int y0, int z0, int x1, int y1, int z1) const {
    const auto at = [&](int x, int y, int z) -> double {
      if (x < 0 || y < 0 || z < 0) return 0.0;
      return table[static_cast<std::size_t>(
          x + static_cast<std::int64_t>(dims.nx) *
                  (y + static_cast<std::int64_t>(dims.ny) * z))];
    };
    return at(x1, y1, z1) - at(x0 - 1, y1, z1) - at(x1, y0 - 1, z1) -
           at(x1, y1, z0 - 1) + at(x0 - 1, y0 - 1, z1) + at(x0 - 1, y1, z0 - 1) +
           at(x1, y0 - 1, z0 - 1) - at(x0 - 1, y0 - 1, z0 - 1);
  }
};

Volume3 average_ball(const Volume3& pred, double r_a, int threads) {
  const std::vector<Offset3> offsets = ball_offsets(r_a);
  const Dims3 dims = pred.dims();
  const int reach = static_cast<int>(std::floor(r_a));
  Volume3 out(dims, 0.0f, pred.voxel_size_nm());

  parallel_for_chunks(dims.nz, threads, [&](std::int64_t z_begin, std::int64_t z_end) {
    for (std::int64_t z = z_begin; z < z_end; ++z) {
      const bool z_inner = z >= reach && z < dims.nz - reach;
      for (int y = 0; y < dims.ny; ++y) {
        const bool y_inner = y >= reach && y < dims.ny - reach;
        for (int x = 0; x < dims.nx; ++x) {
          double sum = 0.0;
          std::int64_t count = 0;
          if (z_inner && y_inner && x >= reach && x < dims.nx - reach) {
            // Fully interior: every offset lands in bounds.
            for (const Offset3& o : offsets)
              sum += pred.at(x + o.dx, y + o.dy, static_cast<int>(z) + o.dz);
            count = static_cast<std::int64_t>(offsets.size());
          } else {
            for (const Offset3& o : offsets) {
              const Coordinate c{x + o.dx, y + o.dy, static_cast<int>(z) + o.dz};
              if (!pred.contains(c)) continue;
              sum += pred.at(c);
              ++count;
            }
          }
          out.at(x, y, static_cast<int>(z)) =
              static_cast<float>(sum / static_cast<double>(count));
        }
      }
    }
  });
  return out;
}

Volume3 average_cube(const Volume3& pred, double r_a, int threads) {
  const int reach = static_cast<int>(std::floor(r_a));
  const Dims3 dims = pred.dims();
  const IntegralVolume integral(pred);
  Volume3 out(dims, 0.0f, pred.voxel_size_nm());

  parallel_for_chunks(dims.nz, threads, [&](std::int64_t z_begin, std::int64_t z_end) {
    for (std::int64_t zi = z_begin; zi < z_end; ++zi) {
      const int z = static_cast<int>(zi);
      const int z0 = std::max(z - reach, 0);
      const int z1 = std::min(z + reach, dims.nz - 1);
      for (int y = 0; y < dims.ny; ++y) {
        const int y0 = std::max(y - reach, 0);
        const int y1 = std::min(y + reach, dims.ny - 1);
        for (int x = 0; x < dims.nx; ++x) {
          const int x0 = std::max(x - reach, 0);
          const int x1 = std::min(x + reach, dims.nx - 1);
          const double sum = integral.box_sum(x0, y0, z0, x1, y1, z1);
          const auto count = static_cast<double>(x1 - x0 + 1) * (y1 - y0 + 1) *
                             (z1 - z0 + 1);
          out.at(x, y, z) = static_cast<float>(sum / count);
        }
      }
    }
  });
  return out;
}

}  // namespace

void PostprocConfig::validate() const {
  if (!(r_a > 0.0) || !std::isfinite(r_a))
    throw ValidationError("PostprocConfig: r_a must be positive and finite");
  if (r_n < 0.0 || !std::isfinite(r_n))
    throw ValidationError("PostprocConfig: r_n must be non-negative and finite");
  if (!(confidence_floor >= 0.0 && confidence_floor < 1.0))
    throw ValidationError("PostprocConfig: confidence_floor must lie in [0, 1)");
  if (max_detections.has_value() && *max_detections <= 0)
    throw ValidationError("PostprocConfig: max_detections must be positive");
  if (r_n < r_a)
    std::cerr << "postproc: warning: suppression radius r_n=" << r_n
              << " is smaller than averaging radius r_a=" << r_a
              << "; nearby maxima of one object may survive\n";
}

Volume3 average_predictions(const Volume3& pred, double r_a, AveragingWindow window,
                            int threads) {
  if (!(r_a > 0.0) || !std::isfinite(r_a))
    throw ValidationError("average_predictions: r_a must be positive and finite");
  if (pred.size() == 0)
    throw ValidationError("average_predictions: empty prediction volume");
  return window == AveragingWindow::kBall ? average_ball(pred, r_a, threads)
                                          : average_cube(pred, r_a, threads);
}

PointSet nms_detect(const Volume3& averaged, const PostprocConfig& config) {
  config.validate();
  if (averaged.size() == 0) throw ValidationError("nms_detect: empty volume");

  bool out_of_range = false;
  for (const float v : averaged.values())
    if (!(v >= 0.0f && v <= 1.0f)) {
      out_of_range = true;
      break;
    }
  if (out_of_range)
    std::cerr << "nms_detect: warning: averaged map has values outside [0, 1]\n";

  // Lazy-deletion max-heap: stale entries are detected by comparing the
  // stored value against the current map. Suppression writes exact 0.0f and
  // only values strictly above the (non-negative) floor are ever pushed, so a
  // suppressed voxel can never collide with its queued value.
  struct Entry {
    float value;
    std::int64_t index;
  };
  struct Lower {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.value != b.value) return a.value < b.value;
      return a.index > b.index;  // equal values: smaller index wins
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, Lower> heap;

  Volume3 work = averaged;
  const float floor = static_cast<float>(config.confidence_floor);
  for (std::int64_t i = 0; i < work.size(); ++i)
    if (work[i] > floor) heap.push(Entry{work[i], i});

  const std::vector<Offset3> suppression = ball_offsets(config.r_n);
  PointSet detections;
  while (!heap.empty()) {
    const Entry top = heap.top();
    heap.pop();
    if (work[top.index] != top.value) continue;  // suppressed since pushed
    const Coordinate peak = work.coordinate_of(top.index);
    detections.points.push_back(Point{peak, static_cast<double>(top.value)});
    for (const Offset3& o : suppression) {
      const Coordinate c{peak.x + o.dx, peak.y + o.dy, peak.z + o.dz};
      if (work.contains(c)) work[work.index(c)] = 0.0f;
    }
    if (config.max_detections.has_value() &&
        static_cast<std::int64_t>(detections.points.size()) >= *config.max_detections)
      break;
  }
  return detections;
}

PointSet threshold_detections(const PointSet& detections, double tau) {
  if (!detections.all_have_confidence())
    throw ValidationError("threshold_detections: detections lack confidences");
  PointSet kept;
  for (const Point& p : detections.points)
    if (*p.confidence >= tau) kept.points.push_back(p);
  return kept;
}

}  // namespace voxdet
