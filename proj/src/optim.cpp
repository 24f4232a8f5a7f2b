#include "dmac/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace dmac {

void RmspropConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("learning_rate must be positive");
  if (!(decay > 0.0 && decay < 1.0))
    throw std::invalid_argument("decay must lie in (0, 1)");
  if (!(epsilon > 0.0))
    throw std::invalid_argument("epsilon must be positive");
}

void rmsprop_update(Matrix& param, const Matrix& grad, Matrix& accumulator,
                    const RmspropConfig& cfg) {
  if (!param.same_shape(grad) || !param.same_shape(accumulator))
    throw ShapeError("rmsprop: param " + param.shape() + ", grad " + grad.shape() +
                     ", accumulator " + accumulator.shape());
  auto p = param.data();
  auto g = grad.data();
  auto v = accumulator.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    v[i] = cfg.decay * v[i] + (1.0 - cfg.decay) * g[i] * g[i];
    p[i] -= cfg.learning_rate * g[i] / (std::sqrt(v[i]) + cfg.epsilon);
  }
}

Rmsprop::Rmsprop(std::vector<Tensor> params, RmspropConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  cfg_.validate();
  accumulators_.reserve(params_.size());
  for (const auto& p : params_)
    accumulators_.emplace_back(p.rows(), p.cols());
}

void Rmsprop::zero_grad() {
  for (auto& p : params_)
    p.zero_grad();
}

void Rmsprop::step() {
  for (std::size_t i = 0; i < params_.size(); ++i)
    rmsprop_update(params_[i].mutable_value(), params_[i].grad(), accumulators_[i], cfg_);
}

} // namespace dmac
