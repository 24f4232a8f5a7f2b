#include "dmac/agcn.hpp"

#include <random>

namespace dmac {

Agcn::Agcn(std::size_t input_width, std::size_t clusters, const AgcnSpec& spec,
           std::uint64_t seed)
    : activation_(spec.activation) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> widths{input_width};
  widths.insert(widths.end(), spec.hidden.begin(), spec.hidden.end());
  widths.push_back(clusters);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l)
    weights_.push_back(Tensor::parameter(glorot_uniform(widths[l], widths[l + 1], rng)));
}

Tensor Agcn::forward(Tape& tape, const Matrix& propagation, const Tensor& anchors) const {
  if (propagation.rows() != anchors.rows() || propagation.cols() != anchors.rows())
    throw ShapeError("AGCN propagation " + propagation.shape() + " for " +
                     std::to_string(anchors.rows()) + " anchors");
  if (anchors.cols() != weights_.front().rows())
    throw ShapeError("AGCN expects anchor width " + std::to_string(weights_.front().rows()) +
                     ", got " + std::to_string(anchors.cols()));
  const Tensor a_hat = tape.constant(propagation);
  Tensor f = anchors;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    f = tape.matmul(tape.matmul(a_hat, f), weights_[l]);
    f = l + 1 == weights_.size() ? tape.softmax_rows(f) : apply_activation(tape, f, activation_);
  }
  return f;
}

} // namespace dmac
