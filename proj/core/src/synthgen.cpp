#include "voxdet/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "voxdet/errors.hpp"
#include "voxdet/rng.hpp"

namespace voxdet {

namespace {

// Sub-stream ids under the master seed, so e.g. raising the noise level
// never moves the object centers.
constexpr std::uint64_t kPlacementStream = 0;
constexpr std::uint64_t kShapeStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

constexpr double kElongation = 1.8;
constexpr double kSigmaReach = 3.5;  // render bumps out to this many sigmas

}  // namespace

void SynthConfig::validate() const {
  if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0)
    throw ValidationError("SynthConfig: dims must be positive");
  if (n_objects < 0)
    throw ValidationError("SynthConfig: n_objects must be non-negative");
  if (!(object_radius > 0.0) || !std::isfinite(object_radius))
    throw ValidationError("SynthConfig: object_radius must be positive and finite");
  if (!(object_intensity > 0.0) || !std::isfinite(object_intensity))
    throw ValidationError("SynthConfig: object_intensity must be positive and finite");
  if (background_noise_std < 0.0 || !std::isfinite(background_noise_std))
    throw ValidationError(
        "SynthConfig: background_noise_std must be non-negative and finite");
  if (!std::isfinite(min_separation) || !(min_separation > 2.0 * object_radius))
    throw ValidationError(
        "SynthConfig: min_separation must exceed twice the object radius");
  if (border_clearance < 0)
    throw ValidationError("SynthConfig: border_clearance must be non-negative");
  if (n_objects > 0 &&
      (dims.nx - 2 * border_clearance < 1 || dims.ny - 2 * border_clearance < 1 ||
       dims.nz - 2 * border_clearance < 1))
    throw InfeasibleConfigError(
        "SynthConfig: border_clearance leaves no voxels to place objects in");
}

SynthVolume generate(const SynthConfig& config) {
  config.validate();

  // Centers: uniform rejection sampling over the border-cleared interior,
  // keeping every pair at least min_separation apart (exact integer test).
  Rng placement_rng(derive_seed(config.seed, kPlacementStream));
  const std::int64_t span_x = config.dims.nx - 2 * config.border_clearance;
  const std::int64_t span_y = config.dims.ny - 2 * config.border_clearance;
  const std::int64_t span_z = config.dims.nz - 2 * config.border_clearance;
  const double min_sep_squared = config.min_separation * config.min_separation;

  std::vector<Coordinate> centers;
  centers.reserve(static_cast<std::size_t>(config.n_objects));
  const std::int64_t budget = 1000 * static_cast<std::int64_t>(config.n_objects);
  for (std::int64_t attempt = 0;
       attempt < budget &&
       centers.size() < static_cast<std::size_t>(config.n_objects);
       ++attempt) {
    const Coordinate candidate{
        config.border_clearance +
            static_cast<int>(placement_rng.uniform_int(static_cast<std::uint64_t>(span_x))),
        config.border_clearance +
            static_cast<int>(placement_rng.uniform_int(static_cast<std::uint64_t>(span_y))),
        config.border_clearance +
            static_cast<int>(placement_rng.uniform_int(static_cast<std::uint64_t>(span_z)))};
    const bool clear = std::all_of(
        centers.begin(), centers.end(), [&](const Coordinate& c) {
          return static_cast<double>(squared_distance(candidate, c)) >= min_sep_squared;
        });
    if (clear) centers.push_back(candidate);
  }
  if (centers.size() < static_cast<std::size_t>(config.n_objects))
    throw InfeasibleConfigError(
        "generate: placed " + std::to_string(centers.size()) + " of " +
        std::to_string(config.n_objects) + " objects within " +
        std::to_string(budget) +
        " attempts; loosen min_separation or enlarge dims");

  Volume3 volume(config.dims);

  // Bumps: anisotropic Gaussians, sigma = radius/2 with one seeded axis
  // elongated, truncated at kSigmaReach sigmas and summed into the grid.
  Rng shape_rng(derive_seed(config.seed, kShapeStream));
  const double base_sigma = config.object_radius / 2.0;
  for (const Coordinate& center : centers) {
    const std::uint64_t long_axis = shape_rng.uniform_int(3);
    const double sigma[3] = {long_axis == 0 ? base_sigma * kElongation : base_sigma,
                             long_axis == 1 ? base_sigma * kElongation : base_sigma,
                             long_axis == 2 ? base_sigma * kElongation : base_sigma};
    const int reach[3] = {static_cast<int>(std::ceil(kSigmaReach * sigma[0])),
                          static_cast<int>(std::ceil(kSigmaReach * sigma[1])),
                          static_cast<int>(std::ceil(kSigmaReach * sigma[2]))};
    const int x0 = std::max(center.x - reach[0], 0);
    const int x1 = std::min(center.x + reach[0], config.dims.nx - 1);
    const int y0 = std::max(center.y - reach[1], 0);
    const int y1 = std::min(center.y + reach[1], config.dims.ny - 1);
    const int z0 = std::max(center.z - reach[2], 0);
    const int z1 = std::min(center.z + reach[2], config.dims.nz - 1);
    for (int z = z0; z <= z1; ++z)
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          const double ux = (x - center.x) / sigma[0];
          const double uy = (y - center.y) / sigma[1];
          const double uz = (z - center.z) / sigma[2];
          const double value =
              config.object_intensity *
              std::exp(-0.5 * (ux * ux + uy * uy + uz * uz));
          volume.at(x, y, z) += static_cast<float>(value);
        }
  }

  // I.i.d. Gaussian noise over every voxel, then clamp into [0, 2]. Linear
  // (x-fastest) order keeps the stream deterministic.
  Rng noise_rng(derive_seed(config.seed, kNoiseStream));
  for (std::int64_t i = 0; i < volume.size(); ++i) {
    const double noisy = volume[i] + noise_rng.normal(0.0, config.background_noise_std);
    volume[i] = static_cast<float>(std::clamp(noisy, 0.0, 2.0));
  }

  SynthVolume out;
  out.volume = std::move(volume);
  for (const Coordinate& center : centers)
    out.ground_truth.points.push_back(Point{center, std::nullopt});
  return out;
}

}  // namespace voxdet
