#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

namespace voxdet::testing {

/// Unique scratch directory under the system temp root, removed on scope
/// exit. Uniqueness combines one process-wide random tag with a counter so
/// parallel test binaries cannot collide.
class TempDir {
 public:
  TempDir() {
    static const std::uint64_t process_tag = std::random_device{}();
    static std::atomic<std::uint64_t> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("voxdet_test_" + std::to_string(process_tag) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);  // best effort
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace voxdet::testing
