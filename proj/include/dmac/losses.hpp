#pragma once

#include <span>
#include <vector>

#include "dmac/autodiff.hpp"
#include "dmac/graph.hpp"

namespace dmac {

struct LossWeights {
  double alpha = 1.0; ///< consistency weight
  double beta = 1e-4; ///< structure-preservation weight

  void validate() const;
};

struct JointClusterDistribution {
  Matrix joint; ///< c × c, sums to one
  std::vector<double> row_marginal;
  std::vector<double> col_marginal;
};

/// P = (1/m) F_aᵀ F_b with its marginals; a plain-value view of what
/// mutual_information differentiates through.
JointClusterDistribution joint_cluster_distribution(const Matrix& fa, const Matrix& fb);

/// MI between two anchor clustering distributions, estimated from the
/// joint P over all anchors. Swapping the views transposes P and leaves MI unchanged.
Tensor mutual_information(Tape& tape, const Tensor& fa, const Tensor& fb);

/// −Σ_{a<b} MI(F_a, F_b). Returns 0 for a single view.
Tensor consistency_loss(Tape& tape, std::span<const Tensor> distributions);

/// Σ_ij ‖z_i − z_j‖² g_ij for G = S D⁻¹ Sᵀ, evaluated without forming G as
///   2 (‖Z‖²_F − ‖D^{-1/2} Sᵀ Z‖²_F).
Tensor structure_preservation_loss(Tape& tape, const Tensor& z, const AnchorGraph& s);

/// L = L_AL + α·L_CM + β·L_SP.
Tensor joint_loss(Tape& tape, const Tensor& anchor_learning, const Tensor& consistency,
                  const Tensor& structure, const LossWeights& w);

} // namespace dmac
