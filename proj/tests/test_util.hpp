#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "nofrills/geometry.hpp"

namespace nofrills::testutil {

/// Temporary directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("nofrills_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline Box random_box(std::mt19937_64& rng, double extent = 100.0,
                      double min_size = 1.0, double max_size = 40.0) {
  std::uniform_real_distribution<double> pos(0.0, extent - max_size);
  std::uniform_real_distribution<double> size(min_size, max_size);
  const double x1 = pos(rng);
  const double y1 = pos(rng);
  return Box(x1, y1, x1 + size(rng), y1 + size(rng));
}

}  // namespace nofrills::testutil
