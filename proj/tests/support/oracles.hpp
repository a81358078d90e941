#pragma once

// Brute-force reference implementations used as test oracles. Each one
// follows the plain per-element definition with no shortcuts, shared
// structure, or state, so agreement with the library is meaningful. They are
// deliberately slow; keep instance sizes small.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "voxdet/classifier.hpp"
#include "voxdet/eval.hpp"
#include "voxdet/points.hpp"
#include "voxdet/volume.hpp"

namespace voxdet::oracle {

/// Per-voxel label definition: 1.0 iff some center lies within r_l
/// (Euclidean, via sqrt rather than the library's integer-squared test).
inline Volume3 brute_label_volume(const PointSet& points, Dims3 dims, double r_l) {
  Volume3 out(dims);
  for (int z = 0; z < dims.nz; ++z)
    for (int y = 0; y < dims.ny; ++y)
      for (int x = 0; x < dims.nx; ++x) {
        const Coordinate voxel{x, y, z};
        for (const Point& p : points.points) {
          if (std::sqrt(static_cast<double>(squared_distance(voxel, p.pos))) <= r_l) {
            out.at(x, y, z) = 1.0f;
            break;
          }
        }
      }
  return out;
}

/// Number of lattice offsets with dx^2+dy^2+dz^2 <= r^2.
inline std::int64_t ball_lattice_count(double radius) {
  const int reach = static_cast<int>(std::ceil(radius));
  std::int64_t count = 0;
  for (int dz = -reach; dz <= reach; ++dz)
    for (int dy = -reach; dy <= reach; ++dy)
      for (int dx = -reach; dx <= reach; ++dx) {
        const double d2 = static_cast<double>(dx) * dx +
                          static_cast<double>(dy) * dy +
                          static_cast<double>(dz) * dz;
        if (d2 <= radius * radius) ++count;
      }
  return count;
}

/// Direct block-mean downsampling.
inline Volume3 brute_downsample(const Volume3& v, int factor) {
  const Dims3 in = v.dims();
  const Dims3 out_dims{(in.nx + factor - 1) / factor, (in.ny + factor - 1) / factor,
                       (in.nz + factor - 1) / factor};
  Volume3 out(out_dims, 0.0f, v.voxel_size_nm());
  for (int z = 0; z < out_dims.nz; ++z)
    for (int y = 0; y < out_dims.ny; ++y)
      for (int x = 0; x < out_dims.nx; ++x) {
        double sum = 0.0;
        std::int64_t n = 0;
        for (int dz = 0; dz < factor; ++dz)
          for (int dy = 0; dy < factor; ++dy)
            for (int dx = 0; dx < factor; ++dx) {
              const Coordinate c{x * factor + dx, y * factor + dy, z * factor + dz};
              if (!v.contains(c)) continue;
              sum += v.at(c);
              ++n;
            }
        out.at(x, y, z) = static_cast<float>(sum / static_cast<double>(n));
      }
  return out;
}

/// Per-voxel ball mean with an explicit distance test per neighbor.
inline Volume3 brute_average_ball(const Volume3& pred, double r_a) {
  const Dims3 dims = pred.dims();
  const int reach = static_cast<int>(std::ceil(r_a));
  Volume3 out(dims, 0.0f, pred.voxel_size_nm());
  for (int z = 0; z < dims.nz; ++z)
    for (int y = 0; y < dims.ny; ++y)
      for (int x = 0; x < dims.nx; ++x) {
        double sum = 0.0;
        std::int64_t count = 0;
        for (int dz = -reach; dz <= reach; ++dz)
          for (int dy = -reach; dy <= reach; ++dy)
            for (int dx = -reach; dx <= reach; ++dx) {
              const double d2 = static_cast<double>(dx) * dx +
                                static_cast<double>(dy) * dy +
                                static_cast<double>(dz) * dz;
              if (d2 > r_a * r_a) continue;
              const Coordinate c{x + dx, y + dy, z + dz};
              if (!pred.contains(c)) continue;
              sum += pred.at(c);
              ++count;
            }
        out.at(x, y, z) = static_cast<float>(sum / static_cast<double>(count));
      }
  return out;
}

/// Per-voxel cube (Chebyshev) mean.
inline Volume3 brute_average_cube(const Volume3& pred, double r_a) {
  const Dims3 dims = pred.dims();
  const int reach = static_cast<int>(std::floor(r_a));
  Volume3 out(dims, 0.0f, pred.voxel_size_nm());
  for (int z = 0; z < dims.nz; ++z)
    for (int y = 0; y < dims.ny; ++y)
      for (int x = 0; x < dims.nx; ++x) {
        double sum = 0.0;
        std::int64_t count = 0;
        for (int dz = -reach; dz <= reach; ++dz)
          for (int dy = -reach; dy <= reach; ++dy)
            for (int dx = -reach; dx <= reach; ++dx) {
              const Coordinate c{x + dx, y + dy, z + dz};
              if (!pred.contains(c)) continue;
              sum += pred.at(c);
              ++count;
            }
        out.at(x, y, z) = static_cast<float>(sum / static_cast<double>(count));
      }
  return out;
}

/// Sequential NMS reference: re-scan the whole grid for the maximum each
/// round (first occurrence in linear order wins ties), emit, zero the
/// suppression ball, repeat.
inline PointSet brute_nms(const Volume3& averaged, double r_n, double floor,
                          std::int64_t max_detections = -1) {
  Volume3 work = averaged;
  const Dims3 dims = work.dims();
  PointSet detections;
  while (max_detections < 0 ||
         static_cast<std::int64_t>(detections.size()) < max_detections) {
    std::int64_t best = 0;
    for (std::int64_t i = 1; i < work.size(); ++i)
      if (work[i] > work[best]) best = i;
    const float value = work[best];
    if (static_cast<double>(value) <= floor) break;
    const Coordinate peak = work.coordinate_of(best);
    detections.points.push_back(Point{peak, static_cast<double>(value)});
    for (int z = 0; z < dims.nz; ++z)
      for (int y = 0; y < dims.ny; ++y)
        for (int x = 0; x < dims.nx; ++x) {
          const Coordinate c{x, y, z};
          if (std::sqrt(static_cast<double>(squared_distance(c, peak))) <= r_n)
            work[work.index(c)] = 0.0f;
        }
  }
  return detections;
}

/// Maximum-cardinality matching size between detections and ground truth
/// under the distance gate, by exhaustive branch over detections.
inline int exhaustive_max_matching(const PointSet& detections,
                                   const PointSet& ground_truth, double r_match) {
  const int n_det = static_cast<int>(detections.size());
  const int n_gt = static_cast<int>(ground_truth.size());
  std::vector<std::vector<bool>> feasible(
      static_cast<std::size_t>(n_det), std::vector<bool>(static_cast<std::size_t>(n_gt)));
  for (int d = 0; d < n_det; ++d)
    for (int g = 0; g < n_gt; ++g)
      feasible[d][g] =
          std::sqrt(static_cast<double>(squared_distance(
              detections.points[static_cast<std::size_t>(d)].pos,
              ground_truth.points[static_cast<std::size_t>(g)].pos))) <= r_match;

  // dfs over detection index with a bitmask of consumed ground-truth points.
  const auto dfs = [&](const auto& self, int d, unsigned mask) -> int {
    if (d == n_det) return 0;
    int best = self(self, d + 1, mask);  // leave detection d unmatched
    for (int g = 0; g < n_gt; ++g) {
      if (!feasible[d][g] || (mask & (1u << g)) != 0) continue;
      best = std::max(best, 1 + self(self, d + 1, mask | (1u << g)));
    }
    return best;
  };
  return dfs(dfs, 0, 0u);
}

/// Independent MLP forward pass (plain loops, unclamped logistic).
inline double reference_forward(const MlpModel& model, std::span<const float> raw) {
  std::vector<double> current(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    current[i] = (static_cast<double>(raw[i]) - model.feature_mean[i]) /
                 model.feature_std[i];
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const MlpLayer& layer = model.layers[l];
    std::vector<double> next(static_cast<std::size_t>(layer.out));
    for (int o = 0; o < layer.out; ++o) {
      double s = layer.bias[static_cast<std::size_t>(o)];
      for (int i = 0; i < layer.in; ++i)
        s += layer.weights[static_cast<std::size_t>(o) * layer.in + i] *
             current[static_cast<std::size_t>(i)];
      const bool last = (l + 1 == model.layers.size());
      next[static_cast<std::size_t>(o)] = last ? s : std::max(s, 0.0);
    }
    current = std::move(next);
  }
  return 1.0 / (1.0 + std::exp(-current.front()));
}

/// Smallest |pre-activation| over every hidden unit and batch row: the
/// distance of the check point from a ReLU kink. Central differences are
/// only trustworthy when this comfortably exceeds the probe step, since a
/// probe that straddles a kink measures a blend of the two local slopes.
inline double kink_distance(const MlpModel& model, const FeatureMatrix& features) {
  double nearest = std::numeric_limits<double>::infinity();
  for (std::int64_t r = 0; r < features.rows(); ++r) {
    const std::span<const float> row = features.row(r);
    std::vector<double> current(row.size());
    for (std::size_t i = 0; i < row.size(); ++i)
      current[i] = (static_cast<double>(row[i]) - model.feature_mean[i]) /
                   model.feature_std[i];
    for (std::size_t l = 0; l + 1 < model.layers.size(); ++l) {
      const MlpLayer& layer = model.layers[l];
      std::vector<double> next(static_cast<std::size_t>(layer.out));
      for (int o = 0; o < layer.out; ++o) {
        double z = layer.bias[static_cast<std::size_t>(o)];
        for (int i = 0; i < layer.in; ++i)
          z += layer.weights[static_cast<std::size_t>(o) * layer.in + i] *
               current[static_cast<std::size_t>(i)];
        nearest = std::min(nearest, std::abs(z));
        next[static_cast<std::size_t>(o)] = std::max(z, 0.0);
      }
      current = std::move(next);
    }
  }
  return nearest;
}

/// Central finite differences of mlp_batch_loss over every parameter.
inline MlpGradient finite_diff_gradient(const MlpModel& model,
                                        const FeatureMatrix& features,
                                        std::span<const int> labels, double l2,
                                        double eps) {
  MlpGradient grad;
  grad.layers = model.layers;  // shapes; values overwritten below
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    for (std::size_t k = 0; k < model.layers[l].weights.size(); ++k) {
      MlpModel plus = model;
      MlpModel minus = model;
      plus.layers[l].weights[k] += eps;
      minus.layers[l].weights[k] -= eps;
      grad.layers[l].weights[k] = (mlp_batch_loss(plus, features, labels, l2) -
                                   mlp_batch_loss(minus, features, labels, l2)) /
                                  (2.0 * eps);
    }
    for (std::size_t k = 0; k < model.layers[l].bias.size(); ++k) {
      MlpModel plus = model;
      MlpModel minus = model;
      plus.layers[l].bias[k] += eps;
      minus.layers[l].bias[k] -= eps;
      grad.layers[l].bias[k] = (mlp_batch_loss(plus, features, labels, l2) -
                                mlp_batch_loss(minus, features, labels, l2)) /
                               (2.0 * eps);
    }
  }
  return grad;
}

/// Largest relative disagreement between two gradients, with the denominator
/// floored so near-zero entries compare absolutely.
inline double max_gradient_error(const MlpGradient& a, const MlpGradient& b,
                                 double floor = 1e-3) {
  double worst = 0.0;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    for (std::size_t k = 0; k < a.layers[l].weights.size(); ++k) {
      const double ga = a.layers[l].weights[k];
      const double gb = b.layers[l].weights[k];
      worst = std::max(worst, std::abs(ga - gb) /
                                  std::max({std::abs(ga), std::abs(gb), floor}));
    }
    for (std::size_t k = 0; k < a.layers[l].bias.size(); ++k) {
      const double ga = a.layers[l].bias[k];
      const double gb = b.layers[l].bias[k];
      worst = std::max(worst, std::abs(ga - gb) /
                                  std::max({std::abs(ga), std::abs(gb), floor}));
    }
  }
  return worst;
}

}  // namespace voxdet::oracle
