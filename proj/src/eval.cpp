#include "dmac/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "dmac/random.hpp"

namespace dmac {

namespace {

Matrix plus_plus_seeding(const Matrix& x, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = x.rows();
  Matrix centroids(k, x.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  for (std::size_t c = 0; c < k; ++c) {
    std::copy_n(x.row(pick).begin(), x.cols(), centroids.row(c).begin());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(x.row(i), centroids.row(c)));
      total += d2[i];
    }
    if (c + 1 == k)
      break;
    if (total > 0.0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        r -= d2[i];
        if (r < 0.0 && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      if (d2[pick] == 0.0) {
        // rounding pushed us past the end; take the last point with mass
        for (std::size_t i = n; i-- > 0;)
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
      }
    } else {
      pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    }
  }
  return centroids;
}

void recompute_means(const Matrix& x, const std::vector<int>& labels, Matrix& centroids,
                     std::vector<std::size_t>& counts) {
  centroids.fill(0.0);
  std::fill(counts.begin(), counts.end(), 0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto l = static_cast<std::size_t>(labels[i]);
    ++counts[l];
    auto c = centroids.row(l);
    auto r = x.row(i);
    for (std::size_t j = 0; j < r.size(); ++j)
      c[j] += r[j];
  }
  for (std::size_t l = 0; l < counts.size(); ++l)
    if (counts[l] > 0)
      for (double& v : centroids.row(l))
        v /= static_cast<double>(counts[l]);
}

void update_centroids(const Matrix& x, std::vector<int>& labels, Matrix& centroids) {
  const std::size_t k = centroids.rows();
  std::vector<std::size_t> counts(k);
  recompute_means(x, labels, centroids, counts);
  for (std::size_t empty = 0; empty < k; ++empty) {
    if (counts[empty] > 0)
      continue;
    std::size_t far = x.rows();
    double best = -1.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const auto l = static_cast<std::size_t>(labels[i]);
      if (counts[l] < 2)
        continue;
      const double d = squared_distance(x.row(i), centroids.row(l));
      if (d > best) {
        best = d;
        far = i;
      }
    }
    if (far == x.rows())
      break; // cannot happen while k <= n
    labels[far] = static_cast<int>(empty);
    recompute_means(x, labels, centroids, counts);
  }
}

double inertia_of(const Matrix& x, const std::vector<int>& labels, const Matrix& centroids) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    s += squared_distance(x.row(i), centroids.row(static_cast<std::size_t>(labels[i])));
  return s;
}

ClusteringResult lloyd(const Matrix& x, std::size_t k, std::uint64_t seed,
                       std::size_t max_iterations) {
  std::mt19937_64 rng(seed);
  ClusteringResult res;
  res.centroids = plus_plus_seeding(x, k, rng);
  res.labels.assign(x.rows(), -1);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(x.row(i), res.centroids.row(c));
        if (d < bd) {
          bd = d;
          best = static_cast<int>(c);
        }
      }
      inertia += bd;
      if (res.labels[i] != best) {
        res.labels[i] = best;
        changed = true;
      }
    }
    res.inertia_trace.push_back(inertia);
    res.iterations = it + 1;
    if (!changed)
      break;
    update_centroids(x, res.labels, res.centroids);
  }
  res.inertia = inertia_of(x, res.labels, res.centroids);
  return res;
}

std::size_t label_extent(std::span<const int> labels) {
  int mx = -1;
  for (int l : labels) {
    if (l < 0)
      throw std::invalid_argument("labels must be nonnegative");
    mx = std::max(mx, l);
  }
  return static_cast<std::size_t>(mx + 1);
}

void check_lengths(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("label length mismatch: " + std::to_string(pred.size()) + " vs " +
                                std::to_string(truth.size()));
}

} // namespace

ClusteringResult kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, KmeansOptions options) {
  if (k == 0 || k > x.rows())
    throw std::invalid_argument("kmeans: k = " + std::to_string(k) + " must lie in [1, n = " +
                                std::to_string(x.rows()) + "]");
  ClusteringResult best;
  bool have = false;
  const std::size_t restarts = std::max<std::size_t>(options.restarts, 1);
  for (std::size_t r = 0; r < restarts; ++r) {
    auto res = lloyd(x, k, mix_seed(seed, r), options.max_iterations);
    if (!have || res.inertia < best.inertia) {
      best = std::move(res);
      have = true;
    }
  }
  return best;
}

std::vector<std::vector<double>> contingency_table(std::span<const int> pred,
                                                   std::span<const int> truth) {
  check_lengths(pred, truth);
  const std::size_t kp = label_extent(pred), kt = label_extent(truth);
  std::vector<std::vector<double>> table(kp, std::vector<double>(kt, 0.0));
  for (std::size_t i = 0; i < pred.size(); ++i)
    table[static_cast<std::size_t>(pred[i])][static_cast<std::size_t>(truth[i])] += 1.0;
  return table;
}

std::vector<std::size_t> hungarian_max(const std::vector<std::vector<double>>& weight) {
  const std::size_t n = weight.size();
  for (const auto& row : weight)
    if (row.size() != n)
      throw std::invalid_argument("hungarian: matrix must be square");
  if (n == 0)
    return {};
  // Shortest augmenting path with potentials on cost = -weight, 1-based.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j])
          continue;
        const double cur = -weight[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j)
    assignment[p[j] - 1] = j - 1;
  return assignment;
}

double accuracy(std::span<const int> pred, std::span<const int> truth) {
  check_lengths(pred, truth);
  if (pred.empty())
    return 1.0;
  auto table = contingency_table(pred, truth);
  const std::size_t kp = table.size(), kt = table.front().size();
  const std::size_t s = std::max(kp, kt);
  std::vector<std::vector<double>> square(s, std::vector<double>(s, 0.0));
  for (std::size_t i = 0; i < kp; ++i)
    for (std::size_t j = 0; j < kt; ++j)
      square[i][j] = table[i][j];
  const auto match = hungarian_max(square);
  double hit = 0.0;
  for (std::size_t i = 0; i < s; ++i)
    hit += square[i][match[i]];
  return hit / static_cast<double>(pred.size());
}

double nmi(std::span<const int> pred, std::span<const int> truth) {
  check_lengths(pred, truth);
  if (pred.empty())
    return 1.0;
  auto table = contingency_table(pred, truth);
  const double n = static_cast<double>(pred.size());
  std::vector<double> rp(table.size(), 0.0), ct(table.front().size(), 0.0);
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < ct.size(); ++j) {
      rp[i] += table[i][j];
      ct[j] += table[i][j];
    }
  auto entropy = [n](const std::vector<double>& counts) {
    double h = 0.0;
    for (double c : counts)
      if (c > 0.0)
        h -= (c / n) * std::log(c / n);
    return h;
  };
  const double hp = entropy(rp), ht = entropy(ct);
  const bool trivial_p = hp == 0.0, trivial_t = ht == 0.0;
  if (trivial_p && trivial_t)
    return 1.0;
  if (trivial_p || trivial_t)
    return 0.0;
  double mi = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < ct.size(); ++j)
      if (table[i][j] > 0.0)
        mi += (table[i][j] / n) * std::log(n * table[i][j] / (rp[i] * ct[j]));
  return std::clamp(mi / std::sqrt(hp * ht), 0.0, 1.0);
}

} // namespace dmac
