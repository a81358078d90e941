#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <vector>

namespace voxdet {

/// Integer voxel position on the volume lattice (x-fastest linearization).
struct Coordinate {
  int x = 0;
  int y = 0;
  int z = 0;

  friend constexpr auto operator<=>(const Coordinate&, const Coordinate&) = default;
};

/// Squared Euclidean distance in voxel units. Exact on the integer lattice,
/// so inclusive-radius predicates can be evaluated without rounding.
constexpr std::int64_t squared_distance(const Coordinate& a, const Coordinate& b) {
  const std::int64_t dx = a.x - b.x;
  const std::int64_t dy = a.y - b.y;
  const std::int64_t dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

/// Euclidean distance in voxel units.
inline double euclidean_distance(const Coordinate& a, const Coordinate& b) {
  return std::sqrt(static_cast<double>(squared_distance(a, b)));
}

/// True iff distance(a, b) <= radius, evaluated exactly via squared terms.
inline bool within_radius(const Coordinate& a, const Coordinate& b, double radius) {
  if (radius < 0.0) return false;
  return static_cast<double>(squared_distance(a, b)) <= radius * radius;
}

/// Relative voxel offset.
struct Offset3 {
  int dx = 0;
  int dy = 0;
  int dz = 0;
};

/// All lattice offsets with dx^2+dy^2+dz^2 <= radius^2, ordered by z, then y,
/// then x. The order is part of the contract: summations over a ball must be
/// reproducible regardless of how callers partition work.
std::vector<Offset3> ball_offsets(double radius);

/// All lattice offsets with max(|dx|,|dy|,|dz|) <= floor(radius), same order.
std::vector<Offset3> cube_offsets(double radius);

}  // namespace voxdet
