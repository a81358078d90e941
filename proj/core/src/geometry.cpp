#include "voxdet/geometry.hpp"

#include "voxdet/errors.hpp"

namespace voxdet {

namespace {

template <typename Keep>
std::vector<Offset3> offsets_in_box(int reach, Keep keep) {
  std::vector<Offset3> out;
  for (int dz = -reach; dz <= reach; ++dz)
    for (int dy = -reach; dy <= reach; ++dy)
      for (int dx = -reach; dx <= reach; ++dx)
        if (keep(dx, dy, dz)) out.push_back({dx, dy, dz});
  return out;
}

}  // namespace

std::vector<Offset3> ball_offsets(double radius) {
  if (radius < 0.0) throw ValidationError("ball_offsets: negative radius");
  const int reach = static_cast<int>(std::floor(radius));
  const double r2 = radius * radius;
  return offsets_in_box(reach, [r2](int dx, int dy, int dz) {
    const std::int64_t d2 =
        static_cast<std::int64_t>(dx) * dx + static_cast<std::int64_t>(dy) * dy +
        static_cast<std::int64_t>(dz) * dz;
    return static_cast<double>(d2) <= r2;
  });
}

std::vector<Offset3> cube_offsets(double radius) {
  if (radius < 0.0) throw ValidationError("cube_offsets: negative radius");
  const int reach = static_cast<int>(std::floor(radius));
  return offsets_in_box(reach, [](int, int, int) { return true; });
}

}  // namespace voxdet
