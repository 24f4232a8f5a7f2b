#pragma once

#include <cstdint>
#include <vector>

#include "dmac/autodiff.hpp"
#include "dmac/embed.hpp"

namespace dmac {

struct AgcnSpec {
  std::vector<std::size_t> hidden{32};
  Activation activation = Activation::relu;
};

/// Anchor graph convolution network for one view:
///   F⁽ˡ⁺¹⁾ = φ(Â F⁽ˡ⁾ W⁽ˡ⁾),  F⁽⁰⁾ = U,
/// hidden φ from the spec, row softmax on the last layer (width = clusters).
class Agcn {
public:
  Agcn() = default;
  Agcn(std::size_t input_width, std::size_t clusters, const AgcnSpec& spec, std::uint64_t seed);

  /// Returns the m × c anchor clustering distribution.
  Tensor forward(Tape& tape, const Matrix& propagation, const Tensor& anchors) const;

  std::vector<Tensor>& weights() { return weights_; }
  const std::vector<Tensor>& weights() const { return weights_; }
  std::size_t clusters() const { return weights_.back().cols(); }

private:
  std::vector<Tensor> weights_;
  Activation activation_ = Activation::relu;
};

} // namespace dmac
