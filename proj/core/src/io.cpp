#include "voxdet/io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>

#include <json.hpp>

#include "voxdet/errors.hpp"

namespace voxdet {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr int kVolumeFormatVersion = 1;
constexpr int kPointsFormatVersion = 1;

fs::path with_json_suffix(fs::path path) {
  if (path.extension() != ".json") path += ".json";
  return path;
}

ordered_json parse_json_file(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw IoError(std::string(what) + ": cannot open " + path.string());
  ordered_json doc = ordered_json::parse(in, nullptr, false);
  if (doc.is_discarded())
    throw ValidationError(std::string(what) + ": malformed JSON in " + path.string());
  return doc;
}

void write_text_file(const fs::path& path, const std::string& text, const char* what) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(std::string(what) + ": cannot open " + path.string() +
                          " for writing");
  out << text;
  if (!out) throw IoError(std::string(what) + ": write failed for " + path.string());
}

std::uint32_t load_le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_le32(std::uint32_t v, unsigned char* p) {
  p[0] = static_cast<unsigned char>(v);
  p[1] = static_cast<unsigned char>(v >> 8);
  p[2] = static_cast<unsigned char>(v >> 16);
  p[3] = static_cast<unsigned char>(v >> 24);
}

}  // namespace

void save_volume(const Volume3& volume, const fs::path& path) {
  fs::path header_path = path;
  if (header_path.extension() == ".json") header_path.replace_extension();
  const fs::path raw_path = fs::path(header_path) += ".raw";
  header_path += ".json";

  ordered_json header;
  header["format"] = "vvol";
  header["version"] = kVolumeFormatVersion;
  header["dims"] = {volume.nx(), volume.ny(), volume.nz()};
  header["dtype"] = "f32le";
  header["order"] = "x-fastest";
  header["voxel_size_nm"] = volume.voxel_size_nm();
  header["data"] = raw_path.filename().string();
  write_text_file(header_path, header.dump(2) + "\n", "save_volume");

  std::ofstream raw(raw_path, std::ios::binary | std::ios::trunc);
  if (!raw)
    throw IoError("save_volume: cannot open " + raw_path.string() + " for writing");
  std::vector<unsigned char> bytes(static_cast<std::size_t>(volume.size()) * 4);
  const std::span<const float> values = volume.values();
  for (std::size_t i = 0; i < values.size(); ++i)
    store_le32(std::bit_cast<std::uint32_t>(values[i]), &bytes[i * 4]);
  raw.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!raw) throw IoError("save_volume: write failed for " + raw_path.string());
}

Volume3 load_volume(const fs::path& path) {
  fs::path header_path = path;
  if (!fs::exists(header_path)) header_path = with_json_suffix(header_path);
  if (!fs::exists(header_path))
    throw IoError("load_volume: no such file: " + path.string());

  const ordered_json header = parse_json_file(header_path, "load_volume");
  if (!header.is_object() || header.value("format", "") != "vvol")
    throw ValidationError("load_volume: not a vvol header: " + header_path.string());
  if (!header.contains("version") || !header["version"].is_number_integer())
    throw ValidationError("load_volume: missing version in " + header_path.string());
  const int version = header["version"].get<int>();
  if (version != kVolumeFormatVersion)
    throw ValidationError("load_volume: unsupported vvol version " +
                          std::to_string(version) + " in " + header_path.string());
  if (header.value("dtype", "") != "f32le")
    throw ValidationError("load_volume: unsupported dtype in " + header_path.string());
  if (header.value("order", "") != "x-fastest")
    throw ValidationError("load_volume: unsupported order in " + header_path.string());
  if (!header.contains("dims") || !header["dims"].is_array() ||
      header["dims"].size() != 3)
    throw ValidationError("load_volume: bad dims in " + header_path.string());

  Dims3 dims{header["dims"][0].get<int>(), header["dims"][1].get<int>(),
             header["dims"][2].get<int>()};
  if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0)
    throw ValidationError("load_volume: non-positive dims in " + header_path.string());
  const double voxel_size_nm = header.value("voxel_size_nm", kDefaultVoxelSizeNm);
  if (!(voxel_size_nm > 0.0))
    throw ValidationError("load_volume: non-positive voxel_size_nm in " +
                          header_path.string());
  if (!header.contains("data") || !header["data"].is_string())
    throw ValidationError("load_volume: missing data field in " + header_path.string());

  const fs::path raw_path = header_path.parent_path() / header["data"].get<std::string>();
  std::ifstream raw(raw_path, std::ios::binary | std::ios::ate);
  if (!raw) throw IoError("load_volume: no such file: " + raw_path.string());
  const std::int64_t byte_count = static_cast<std::int64_t>(raw.tellg());
  const std::int64_t expected = dims.voxel_count() * 4;
  if (byte_count != expected)
    throw ValidationError("load_volume: raw payload " + raw_path.string() + " holds " +
                          std::to_string(byte_count) + " bytes, header implies " +
                          std::to_string(expected));
  raw.seekg(0);
  std::vector<unsigned char> bytes(static_cast<std::size_t>(byte_count));
  raw.read(reinterpret_cast<char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  if (!raw) throw IoError("load_volume: read failed for " + raw_path.string());

  std::vector<float> data(static_cast<std::size_t>(dims.voxel_count()));
  for (std::size_t i = 0; i < data.size(); ++i)
    data[i] = std::bit_cast<float>(load_le32(&bytes[i * 4]));

  Volume3 volume(dims, std::move(data), voxel_size_nm);
  volume.require_finite("load_volume");
  return volume;
}

void save_points(const PointSet& points, const fs::path& path) {
  ordered_json doc;
  doc["format"] = "vpts";
  doc["version"] = kPointsFormatVersion;
  ordered_json rows = ordered_json::array();
  for (const Point& p : points.points) {
    ordered_json row;
    row["x"] = p.pos.x;
    row["y"] = p.pos.y;
    row["z"] = p.pos.z;
    if (p.confidence) row["confidence"] = *p.confidence;
    rows.push_back(std::move(row));
  }
  doc["points"] = std::move(rows);
  write_text_file(path, doc.dump(2) + "\n", "save_points");
}

PointSet load_points(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("load_points: no such file: " + path.string());
  const ordered_json doc = parse_json_file(path, "load_points");
  if (!doc.is_object() || doc.value("format", "") != "vpts")
    throw ValidationError("load_points: not a vpts file: " + path.string());
  const int version = doc.value("version", -1);
  if (version != kPointsFormatVersion)
    throw ValidationError("load_points: unsupported vpts version " +
                          std::to_string(version) + " in " + path.string());
  if (!doc.contains("points") || !doc["points"].is_array())
    throw ValidationError("load_points: missing points array in " + path.string());

  PointSet out;
  out.points.reserve(doc["points"].size());
  for (const auto& row : doc["points"]) {
    if (!row.is_object() || !row.contains("x") || !row.contains("y") ||
        !row.contains("z"))
      throw ValidationError("load_points: malformed point row in " + path.string());
    Point p;
    p.pos = {row["x"].get<int>(), row["y"].get<int>(), row["z"].get<int>()};
    if (p.pos.x < 0 || p.pos.y < 0 || p.pos.z < 0)
      throw ValidationError("load_points: negative coordinate in " + path.string());
    if (row.contains("confidence")) {
      const double c = row["confidence"].get<double>();
      if (!(c >= 0.0 && c <= 1.0))
        throw ValidationError("load_points: confidence outside [0,1] in " +
                              path.string());
      p.confidence = c;
    }
    out.points.push_back(p);
  }
  return out;
}

}  // namespace voxdet
