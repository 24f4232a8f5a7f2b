#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dmac/autodiff.hpp"

namespace dmac {

enum class Activation { identity, relu, tanh };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);

Tensor apply_activation(Tape& tape, const Tensor& x, Activation a);

/// Glorot-uniform weight in ±sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);

struct DenseLayer {
  Tensor weight; ///< in × out
  Tensor bias;   ///< 1 × out, undefined for bias-free layers
};

/// Fully connected stack: widths.front() inputs, widths.back() outputs.
class Mlp {
public:
  Mlp() = default;
  Mlp(std::span<const std::size_t> widths, Activation hidden, Activation output, bool with_bias,
      std::uint64_t seed);

  Tensor forward(Tape& tape, const Tensor& x) const;

  std::size_t input_width() const;
  std::size_t output_width() const;
  std::vector<Tensor> parameters() const;
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

private:
  std::vector<DenseLayer> layers_;
  Activation hidden_ = Activation::relu;
  Activation output_ = Activation::identity;
};

struct EncoderSpec {
  std::vector<std::size_t> hidden{256, 64};
  std::size_t embed_dim = 32;
  Activation activation = Activation::relu;
};

/// Encoder for one view: input_dim → hidden… → embed_dim, linear output.
Mlp make_encoder(std::size_t input_dim, const EncoderSpec& spec, std::uint64_t seed);

/// Z_a = Encoder_a(X_a).
Tensor encode_view(Tape& tape, const Matrix& x, const Mlp& encoder);

/// Z = (1/v) Σ Z_a.
Tensor fuse(Tape& tape, std::span<const Tensor> embeddings);

} // namespace dmac
