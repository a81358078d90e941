#include "voxdet/labeling.hpp"

#include <algorithm>
#include <fstream>
#include <string>

#include <json.hpp>

#include "voxdet/errors.hpp"
#include "voxdet/rng.hpp"

namespace voxdet {

void LabelingConfig::validate() const {
  if (!(r_l > 0.0)) throw ValidationError("LabelingConfig: r_l must be positive");
  if (border_margin < 0)
    throw ValidationError("LabelingConfig: border_margin must be non-negative");
  if (!(negative_ratio > 0.0))
    throw ValidationError("LabelingConfig: negative_ratio must be positive");
}

Volume3 make_label_volume(const PointSet& points, Dims3 dims, double r_l) {
  if (!(r_l > 0.0)) throw ValidationError("make_label_volume: r_l must be positive");
  Volume3 labels(dims, 0.0f);

  const int reach = static_cast<int>(std::floor(r_l));
  const double r2 = r_l * r_l;
  for (const Point& p : points.points) {
    if (!labels.contains(p.pos))
      throw ValidationError("make_label_volume: point (" + std::to_string(p.pos.x) +
                            "," + std::to_string(p.pos.y) + "," +
                            std::to_string(p.pos.z) + ") outside volume");
    const Coordinate c = p.pos;
    const int z0 = std::max(c.z - reach, 0), z1 = std::min(c.z + reach, dims.nz - 1);
    const int y0 = std::max(c.y - reach, 0), y1 = std::min(c.y + reach, dims.ny - 1);
    const int x0 = std::max(c.x - reach, 0), x1 = std::min(c.x + reach, dims.nx - 1);
    for (int z = z0; z <= z1; ++z) {
      const std::int64_t dz2 = static_cast<std::int64_t>(z - c.z) * (z - c.z);
      for (int y = y0; y <= y1; ++y) {
        const std::int64_t dy2 = static_cast<std::int64_t>(y - c.y) * (y - c.y);
        for (int x = x0; x <= x1; ++x) {
          const std::int64_t dx2 = static_cast<std::int64_t>(x - c.x) * (x - c.x);
          if (static_cast<double>(dx2 + dy2 + dz2) <= r2) labels.at(x, y, z) = 1.0f;
        }
      }
    }
  }
  return labels;
}

std::vector<LabeledSample> sample_balanced(const Volume3& labels,
                                           const LabelingConfig& config) {
  config.validate();
  for (std::int64_t i = 0; i < labels.size(); ++i) {
    const float v = labels[i];
    if (v != 0.0f && v != 1.0f)
      throw ValidationError("sample_balanced: label volume is not binary");
  }

  const Dims3 dims = labels.dims();
  const int m = config.border_margin;

  std::vector<LabeledSample> samples;
  std::vector<std::int64_t> negative_candidates;
  // Scan order equals linear index order.
  for (int z = m; z < dims.nz - m; ++z)
    for (int y = m; y < dims.ny - m; ++y)
      for (int x = m; x < dims.nx - m; ++x) {
        if (labels.at(x, y, z) == 1.0f)
          samples.push_back({{x, y, z}, 1});
        else
          negative_candidates.push_back(labels.index(x, y, z));
      }

  const std::int64_t n_positive = static_cast<std::int64_t>(samples.size());
  if (n_positive == 0)
    throw ValidationError(
        "sample_balanced: no positive voxel inside the border margin");

  const std::int64_t wanted = static_cast<std::int64_t>(
      std::floor(config.negative_ratio * static_cast<double>(n_positive)));
  const std::int64_t n_negative =
      std::min<std::int64_t>(wanted, static_cast<std::int64_t>(negative_candidates.size()));

  // Partial Fisher-Yates: the first n_negative entries become the draw.
  Rng rng(config.seed);
  for (std::int64_t i = 0; i < n_negative; ++i) {
    const std::int64_t j =
        i + static_cast<std::int64_t>(rng.uniform_int(
                static_cast<std::uint64_t>(negative_candidates.size() - i)));
    std::swap(negative_candidates[i], negative_candidates[j]);
    samples.push_back({labels.coordinate_of(negative_candidates[i]), 0});
  }
  return samples;
}

void save_samples(const std::vector<LabeledSample>& samples,
                  const std::filesystem::path& path) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const LabeledSample& s : samples) {
    nlohmann::ordered_json row;
    row["x"] = s.position.x;
    row["y"] = s.position.y;
    row["z"] = s.position.z;
    row["label"] = s.label;
    rows.push_back(std::move(row));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("save_samples: cannot open " + path.string() + " for writing");
  out << rows.dump(2) << "\n";
  if (!out) throw IoError("save_samples: write failed for " + path.string());
}

}  // namespace voxdet
