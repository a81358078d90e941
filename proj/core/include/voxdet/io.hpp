#pragma once

#include <filesystem>

#include "voxdet/points.hpp"
#include "voxdet/volume.hpp"

namespace voxdet {

// Volumes are stored as a JSON header plus a raw payload:
//   <name>.json  {"format":"vvol","version":1,"dims":[nx,ny,nz],
//                 "dtype":"f32le","order":"x-fastest",
//                 "voxel_size_nm":10.0,"data":"<name>.raw"}
//   <name>.raw   nx*ny*nz little-endian IEEE-754 32-bit floats, x-fastest.
//
// Point sets are stored as JSON:
//   {"format":"vpts","version":1,
//    "points":[{"x":..,"y":..,"z":..,"confidence":..?}, ...]}

/// Writes `<prefix>.json` + `<prefix>.raw`; a trailing ".json" on the path is
/// accepted and stripped. Round trips are bit-exact.
void save_volume(const Volume3& volume, const std::filesystem::path& path);

/// Loads a volume from its header path (".json" appended if missing).
/// Missing files, header/payload size mismatches and unsupported versions
/// are reported as distinct errors.
Volume3 load_volume(const std::filesystem::path& path);

/// Point-set round trips preserve order, coordinates and confidences exactly.
void save_points(const PointSet& points, const std::filesystem::path& path);
PointSet load_points(const std::filesystem::path& path);

}  // namespace voxdet
