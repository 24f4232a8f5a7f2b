#pragma once

#include <cstdint>
#include <span>

#include "dmac/autodiff.hpp"
#include "dmac/embed.hpp"

namespace dmac {

/// Floor applied to probabilities inside logarithms.
inline constexpr double kLogFloor = 1e-12;

/// ⌊√(n·c)⌋ clamped to [c, n].
std::size_t anchor_count(std::size_t n, std::size_t c);

/// Initial anchors: the m k-means centroids of a detached embedding.
Matrix init_anchors(const Matrix& z, std::size_t m, std::uint64_t seed);

/// Twin perceptrons producing the perturbation mean and deviation from the
/// initial anchors. Both are d_z → d_z → d_z with a ReLU hidden layer.
struct PerturbNet {
  Mlp mean;
  Mlp deviation;

  PerturbNet() = default;
  PerturbNet(std::size_t embed_dim, std::uint64_t seed);

  std::vector<Tensor> parameters() const;
};

struct Perturbation {
  Tensor mean;      ///< μ
  Tensor deviation; ///< σ = softplus(MLP_σ(Û)), strictly positive
  Tensor epsilon;   ///< ε = μ + σ ⊙ ϵ
};

/// Reparameterized perturbation for fixed initial anchors and a fixed
/// standard-normal draw `base` of the same shape.
Perturbation generate_perturbation(Tape& tape, const Matrix& initial_anchors,
                                   const PerturbNet& net, const Matrix& base);

/// U = Û + ε; Û is a constant.
Tensor perturbed_anchors(Tape& tape, const Matrix& initial_anchors, const Tensor& epsilon);

/// Student-t sample–anchor similarity, rows normalized to sum to one:
/// q_ij ∝ (1 + ‖z_i − u_j‖²)⁻¹.
Tensor anchor_similarity(Tape& tape, const Tensor& z, const Tensor& anchors);

/// Σ_a −(1/n) Σ_ij q_ij log q_ij over the given views.
Tensor anchor_learning_loss(Tape& tape, std::span<const Tensor> similarities);

} // namespace dmac
