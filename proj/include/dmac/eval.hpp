#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dmac/matrix.hpp"

namespace dmac {

struct ClusteringResult {
  std::vector<int> labels;
  Matrix centroids;
  double inertia = 0.0;
  std::size_t iterations = 0;
  /// Inertia after each assignment step of the winning restart.
  std::vector<double> inertia_trace;
};

struct KmeansOptions {
  std::size_t restarts = 10;
  std::size_t max_iterations = 300;
};

/// Lloyd's algorithm from k-means++ seeding, best of `restarts` by inertia.
/// Restart r is seeded from (seed, r) so results do not depend on execution
/// order. Empty clusters are refilled with the point farthest from its
/// centroid.
ClusteringResult kmeans(const Matrix& x, std::size_t k, std::uint64_t seed,
                        KmeansOptions options = {});

/// Contingency table counts[p][t] for labels in [0, max+1).
std::vector<std::vector<double>> contingency_table(std::span<const int> pred,
                                                   std::span<const int> truth);

/// Maximum-weight perfect matching on a square matrix (Hungarian, O(n³)).
/// Returns assignment[row] = column.
std::vector<std::size_t> hungarian_max(const std::vector<std::vector<double>>& weight);

/// Fraction of samples correctly labeled under the best one-to-one mapping of
/// predicted clusters to classes.
double accuracy(std::span<const int> pred, std::span<const int> truth);

/// I(pred; truth) / sqrt(H(pred)·H(truth)), natural log. 1 when both
/// partitions are trivial, 0 when exactly one is.
double nmi(std::span<const int> pred, std::span<const int> truth);

} // namespace dmac
