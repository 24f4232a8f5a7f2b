#include "dmac/embed.hpp"

#include <cmath>
#include <stdexcept>

#include "dmac/random.hpp"

namespace dmac {

Activation parse_activation(const std::string& name) {
  if (name == "identity" || name == "linear")
    return Activation::identity;
  if (name == "relu")
    return Activation::relu;
  if (name == "tanh")
    return Activation::tanh;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

std::string to_string(Activation a) {
  switch (a) {
  case Activation::identity:
    return "identity";
  case Activation::relu:
    return "relu";
  case Activation::tanh:
    return "tanh";
  }
  return "?";
}

Tensor apply_activation(Tape& tape, const Tensor& x, Activation a) {
  switch (a) {
  case Activation::relu:
    return tape.relu(x);
  case Activation::tanh:
    return tape.tanh(x);
  case Activation::identity:
    break;
  }
  return x;
}

Matrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix w(fan_in, fan_out);
  for (double& x : w.data())
    x = dist(rng);
  return w;
}

Mlp::Mlp(std::span<const std::size_t> widths, Activation hidden, Activation output,
         bool with_bias, std::uint64_t seed)
    : hidden_(hidden), output_(output) {
  if (widths.size() < 2)
    throw std::invalid_argument("an MLP needs at least input and output widths");
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer;
    layer.weight = Tensor::parameter(glorot_uniform(widths[l], widths[l + 1], rng));
    if (with_bias)
      layer.bias = Tensor::parameter(Matrix(1, widths[l + 1]));
    layers_.push_back(std::move(layer));
  }
}

Tensor Mlp::forward(Tape& tape, const Tensor& x) const {
  if (x.cols() != input_width())
    throw ShapeError("MLP expects " + std::to_string(input_width()) + " input columns, got " +
                     std::to_string(x.cols()));
  Tensor h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    h = tape.matmul(h, layers_[l].weight);
    if (layers_[l].bias.defined())
      h = tape.add_row(h, layers_[l].bias);
    h = apply_activation(tape, h, l + 1 == layers_.size() ? output_ : hidden_);
  }
  return h;
}

std::size_t Mlp::input_width() const { return layers_.front().weight.rows(); }
std::size_t Mlp::output_width() const { return layers_.back().weight.cols(); }

std::vector<Tensor> Mlp::parameters() const {
  std::vector<Tensor> ps;
  for (const auto& l : layers_) {
    ps.push_back(l.weight);
    if (l.bias.defined())
      ps.push_back(l.bias);
  }
  return ps;
}

Mlp make_encoder(std::size_t input_dim, const EncoderSpec& spec, std::uint64_t seed) {
  std::vector<std::size_t> widths{input_dim};
  widths.insert(widths.end(), spec.hidden.begin(), spec.hidden.end());
  widths.push_back(spec.embed_dim);
  return Mlp(widths, spec.activation, Activation::identity, true, seed);
}

Tensor encode_view(Tape& tape, const Matrix& x, const Mlp& encoder) {
  return encoder.forward(tape, tape.constant(x));
}

Tensor fuse(Tape& tape, std::span<const Tensor> embeddings) {
  if (embeddings.empty())
    throw std::invalid_argument("fuse needs at least one view");
  for (std::size_t a = 1; a < embeddings.size(); ++a)
    if (!embeddings[a].value().same_shape(embeddings.front().value()))
      throw ShapeError("fuse: view " + std::to_string(a) + " is " + embeddings[a].value().shape() +
                       ", expected " + embeddings.front().value().shape());
  if (embeddings.size() == 1)
    return embeddings.front();
  return tape.mean(embeddings);
}

} // namespace dmac
