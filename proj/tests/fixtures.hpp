#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "dmac/dataio.hpp"
#include "dmac/matrix.hpp"

namespace fixture {

inline dmac::Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                                  double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  dmac::Matrix m(rows, cols);
  for (auto& v : m.data())
    v = normal(rng);
  return m;
}

inline dmac::Matrix random_positive(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.1, 2.0);
  dmac::Matrix m(rows, cols);
  for (auto& v : m.data())
    v = dist(rng);
  return m;
}

inline std::size_t uniform_int(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline dmac::MultiViewDataset normalized(dmac::MultiViewDataset ds) {
  for (auto& v : ds.views)
    v = dmac::l2_normalize_rows(v).matrix;
  return ds;
}

/// Well-separated Gaussian blobs, normalized as the loader would.
inline dmac::MultiViewDataset blobs(std::size_t n = 300, std::uint64_t seed = 0) {
  dmac::SyntheticSpec spec;
  spec.samples = n;
  spec.views = 2;
  spec.clusters = 3;
  spec.spread = 10.0;
  spec.noise = 1.0;
  spec.seed = seed;
  return normalized(dmac::generate_synthetic(spec));
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag)
      : path_(std::filesystem::temp_directory_path() /
              ("dmac_" + tag + "_" + std::to_string(std::random_device{}()))) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

} // namespace fixture
