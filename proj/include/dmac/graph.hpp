#pragma once

#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "dmac/matrix.hpp"

namespace dmac {

/// Raised when a dense n×n object would exceed the configured size cap.
class CapacityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultFullGraphCap = 4096;

/// Sparse n×m sample-to-anchor graph. Every row lies on the probability
/// simplex.
struct AnchorGraph {
  SparseMatrix weights;        ///< n × m
  std::vector<double> degrees; ///< d_j = Σ_i s_ij
  std::vector<double> gamma;   ///< per-row regularizer implied by the closed form (0 on fallback rows)

  std::size_t samples() const { return weights.rows(); }
  std::size_t anchors() const { return weights.cols(); }

  /// Builds a graph from an explicit dense S (degrees derived, gamma zeroed).
  static AnchorGraph from_dense(const Matrix& s);
};

/// Closed-form solution of
///   min_s Σ_j d_ij s_ij + γ_i ‖s_i‖²  s.t. s_i on the simplex,
/// with γ_i chosen so that exactly the k nearest anchors are active:
///   s_ij = (d_{i,k+1} − d_ij) / (k·d_{i,k+1} − Σ_{h≤k} d_ih).
/// Ties sort by anchor index. A zero denominator (or k = m) yields 1/k on the
/// k nearest anchors.
AnchorGraph solve_anchor_graph(const Matrix& z, const Matrix& anchors, std::size_t k);

/// Â = D⁻¹ Sᵀ S (m × m); zero-degree anchors get a zero row.
Matrix propagation_operator(const AnchorGraph& s);

/// G = S D⁻¹ Sᵀ (n × n). Throws CapacityError when n > cap.
Matrix full_sample_graph(const AnchorGraph& s, std::size_t cap = kDefaultFullGraphCap);

/// D^{-1/2} Sᵀ as an m × n sparse matrix, the factor used by the trace-form
/// structure loss: tr(Zᵀ G Z) = ‖D^{-1/2} Sᵀ Z‖²_F.
SparseMatrix scaled_anchor_transpose(const AnchorGraph& s);

/// Writes "i j s_ij" lines, one per stored entry.
void write_coordinates(std::ostream& out, const AnchorGraph& s);

} // namespace dmac
