#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmac/matrix.hpp"

namespace dmac {

/// Raised for malformed or inconsistent dataset directories.
class LoadError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct MultiViewDataset {
  std::vector<Matrix> views;
  std::optional<std::vector<int>> labels;
  std::size_t clusters = 0;
  /// Non-fatal notes gathered while loading (e.g. zero rows met during normalization).
  std::vector<std::string> warnings;

  std::size_t samples() const { return views.empty() ? 0 : views.front().rows(); }
  std::size_t view_count() const { return views.size(); }
  std::vector<std::size_t> view_dims() const;

  /// Throws LoadError if views disagree on n, c < 2, or labels are out of range.
  void validate() const;
};

struct NormalizedRows {
  Matrix matrix;
  std::vector<std::size_t> zero_rows;
};

/// Scales every nonzero row to unit Euclidean norm. Zero rows are kept and
/// reported.
NormalizedRows l2_normalize_rows(const Matrix& x);

enum class ViewFormat { csv, binary };

// Matrix files. Binary layout: "DMX1", u64 rows, u64 cols, row-major f64,
// all little-endian.
Matrix read_matrix(const std::filesystem::path& path);
Matrix read_csv_matrix(const std::filesystem::path& path);
Matrix read_dmx_matrix(const std::filesystem::path& path);
void write_csv_matrix(const std::filesystem::path& path, const Matrix& m);
void write_dmx_matrix(const std::filesystem::path& path, const Matrix& m);

std::vector<int> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<int>& labels);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Reads `dir/manifest.json` and the files it names. Applies row
/// normalization when the manifest's "normalize" flag is set.
MultiViewDataset load_dataset(const std::filesystem::path& dir);

/// Writes manifest, one file per view and labels.txt (when labels exist).
void save_dataset(const MultiViewDataset& ds, const std::filesystem::path& dir,
                  ViewFormat format = ViewFormat::binary, bool normalize_on_load = false);

struct SyntheticSpec {
  std::size_t samples = 300;
  std::size_t views = 2;
  std::size_t clusters = 3;
  std::vector<std::size_t> dims{20};  ///< one entry per view, or a single entry shared by all
  double spread = 10.0;                ///< std-dev of cluster centers
  double noise = 1.0;                  ///< std-dev of within-cluster noise
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t dim_of(std::size_t view) const;
};

/// Gaussian blobs: per cluster and view a center ~ N(0, spread²·I), samples
/// are center + N(0, noise²·I). Labels are balanced and shuffled.
MultiViewDataset generate_synthetic(const SyntheticSpec& spec);

} // namespace dmac
