#pragma once

#include <vector>

#include "dmac/autodiff.hpp"

namespace dmac {

struct RmspropConfig {
  double learning_rate = 1e-3;
  double decay = 0.99;
  double epsilon = 1e-8;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// One elementwise RMSprop update:
///   v ← ρ·v + (1−ρ)·g⊙g,  θ ← θ − η·g / (√v + ε)
void rmsprop_update(Matrix& param, const Matrix& grad, Matrix& accumulator,
                    const RmspropConfig& cfg);

/// RMSprop over a fixed parameter list. Gradients are read from the tensors'
/// grad buffers.
class Rmsprop {
public:
  Rmsprop(std::vector<Tensor> params, RmspropConfig cfg);

  void zero_grad();
  void step();

  const std::vector<Matrix>& accumulators() const { return accumulators_; }
  const RmspropConfig& config() const { return cfg_; }

private:
  std::vector<Tensor> params_;
  std::vector<Matrix> accumulators_;
  RmspropConfig cfg_;
};

} // namespace dmac
