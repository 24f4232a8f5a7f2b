#include "dmac/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "dmac/dataio.hpp"

namespace dmac {

namespace {

std::vector<double> column_sums(const SparseMatrix& s) {
  std::vector<double> d(s.cols(), 0.0);
  for (std::size_t i = 0; i < s.rows(); ++i) {
    auto idx = s.row_indices(i);
    auto val = s.row_values(i);
    for (std::size_t p = 0; p < idx.size(); ++p)
      d[idx[p]] += val[p];
  }
  return d;
}

double safe_inverse(double d) { return d > 0.0 ? 1.0 / d : 0.0; }

} // namespace

AnchorGraph AnchorGraph::from_dense(const Matrix& s) {
  AnchorGraph g;
  g.weights = SparseMatrix::from_dense(s);
  g.degrees = column_sums(g.weights);
  g.gamma.assign(s.rows(), 0.0);
  return g;
}

AnchorGraph solve_anchor_graph(const Matrix& z, const Matrix& anchors, std::size_t k) {
  const std::size_t n = z.rows(), m = anchors.rows();
  if (z.cols() != anchors.cols())
    throw ShapeError("solve_anchor_graph: embedding width " + std::to_string(z.cols()) +
                     " vs anchor width " + std::to_string(anchors.cols()));
  if (k < 1 || k > m)
    throw std::invalid_argument("solve_anchor_graph: k = " + std::to_string(k) +
                                " outside [1, m = " + std::to_string(m) + "]");

  std::vector<std::size_t> ptr(n + 1);
  std::vector<std::size_t> idx(n * k);
  std::vector<double> val(n * k);
  std::vector<double> gamma(n, 0.0);
  std::vector<double> dist(m);
  std::vector<std::size_t> order(m);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j)
      dist[j] = squared_distance(z.row(i), anchors.row(j));
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t keep = std::min(k + 1, m);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
                      });
    ptr[i + 1] = ptr[i] + k;
    double head = 0.0;
    for (std::size_t h = 0; h < k; ++h)
      head += dist[order[h]];
    const double next = k < m ? dist[order[k]] : 0.0;
    const double denom = static_cast<double>(k) * next - head;
    const bool fallback = k == m || !(denom > 0.0);
    for (std::size_t h = 0; h < k; ++h) {
      idx[i * k + h] = order[h];
      val[i * k + h] = fallback ? 1.0 / static_cast<double>(k) : (next - dist[order[h]]) / denom;
    }
    gamma[i] = fallback ? 0.0 : denom / 2.0;
  }

  AnchorGraph g;
  g.weights = SparseMatrix(n, m, std::move(ptr), std::move(idx), std::move(val));
  g.degrees = column_sums(g.weights);
  g.gamma = std::move(gamma);
  return g;
}

Matrix propagation_operator(const AnchorGraph& s) {
  const std::size_t m = s.anchors();
  Matrix a(m, m);
  for (std::size_t i = 0; i < s.samples(); ++i) {
    auto idx = s.weights.row_indices(i);
    auto val = s.weights.row_values(i);
    for (std::size_t p = 0; p < idx.size(); ++p)
      for (std::size_t q = 0; q < idx.size(); ++q)
        a(idx[p], idx[q]) += val[p] * val[q];
  }
  for (std::size_t j = 0; j < m; ++j) {
    const double inv = safe_inverse(s.degrees[j]);
    for (double& x : a.row(j))
      x *= inv;
  }
  return a;
}

Matrix full_sample_graph(const AnchorGraph& s, std::size_t cap) {
  const std::size_t n = s.samples();
  if (n > cap)
    throw CapacityError("full sample graph for n = " + std::to_string(n) + " exceeds cap " +
                        std::to_string(cap) + "; use the trace-form structure loss instead");
  // G = (S D^{-1/2})(S D^{-1/2})ᵀ
  Matrix half = s.weights.to_dense();
  for (std::size_t i = 0; i < n; ++i) {
    auto r = half.row(i);
    for (std::size_t j = 0; j < r.size(); ++j)
      r[j] *= std::sqrt(safe_inverse(s.degrees[j]));
  }
  return matmul_nt(half, half);
}

SparseMatrix scaled_anchor_transpose(const AnchorGraph& s) {
  SparseMatrix t = s.weights.transposed();
  std::vector<std::size_t> ptr{0}, idx;
  std::vector<double> val;
  for (std::size_t j = 0; j < t.rows(); ++j) {
    const double scale = std::sqrt(safe_inverse(s.degrees[j]));
    auto ri = t.row_indices(j);
    auto rv = t.row_values(j);
    for (std::size_t p = 0; p < ri.size(); ++p) {
      idx.push_back(ri[p]);
      val.push_back(rv[p] * scale);
    }
    ptr.push_back(idx.size());
  }
  return SparseMatrix(t.rows(), t.cols(), std::move(ptr), std::move(idx), std::move(val));
}

void write_coordinates(std::ostream& out, const AnchorGraph& s) {
  for (std::size_t i = 0; i < s.samples(); ++i) {
    auto idx = s.weights.row_indices(i);
    auto val = s.weights.row_values(i);
    for (std::size_t p = 0; p < idx.size(); ++p)
      out << i << ' ' << idx[p] << ' ' << format_double(val[p]) << '\n';
  }
}

} // namespace dmac
