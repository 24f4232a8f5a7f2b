#include "dmac/losses.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "dmac/anchor.hpp"

namespace dmac {

void LossWeights::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("alpha must be finite and nonnegative");
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("beta must be finite and nonnegative");
}

JointClusterDistribution joint_cluster_distribution(const Matrix& fa, const Matrix& fb) {
  if (!fa.same_shape(fb))
    throw ShapeError("joint distribution: " + fa.shape() + " vs " + fb.shape());
  JointClusterDistribution d;
  d.joint = matmul_tn(fa, fb);
  const double inv_m = 1.0 / static_cast<double>(fa.rows());
  for (auto& v : d.joint.data())
    v *= inv_m;
  d.row_marginal.assign(d.joint.rows(), 0.0);
  d.col_marginal.assign(d.joint.cols(), 0.0);
  for (std::size_t x = 0; x < d.joint.rows(); ++x)
    for (std::size_t y = 0; y < d.joint.cols(); ++y) {
      d.row_marginal[x] += d.joint(x, y);
      d.col_marginal[y] += d.joint(x, y);
    }
  return d;
}

Tensor mutual_information(Tape& tape, const Tensor& fa, const Tensor& fb) {
  if (!fa.value().same_shape(fb.value()))
    throw ShapeError("mutual_information: " + fa.value().shape() + " vs " + fb.value().shape());
  const double inv_m = 1.0 / static_cast<double>(fa.rows());
  Tensor p = tape.scale(tape.matmul(tape.transpose(fa), fb), inv_m);
  return tape.mutual_information_of_joint(p, kLogFloor);
}

Tensor consistency_loss(Tape& tape, std::span<const Tensor> distributions) {
  if (distributions.size() < 2) {
    std::cerr << "warning: consistency loss needs two views; contributing 0\n";
    return tape.constant(Matrix(1, 1, 0.0));
  }
  Tensor total;
  for (std::size_t a = 0; a < distributions.size(); ++a)
    for (std::size_t b = a + 1; b < distributions.size(); ++b) {
      Tensor mi = mutual_information(tape, distributions[a], distributions[b]);
      total = total.defined() ? tape.add(total, mi) : mi;
    }
  return tape.scale(total, -1.0);
}

Tensor structure_preservation_loss(Tape& tape, const Tensor& z, const AnchorGraph& s) {
  if (z.rows() != s.samples())
    throw ShapeError("structure loss: embedding has " + std::to_string(z.rows()) +
                     " rows, graph has " + std::to_string(s.samples()));
  const Tensor projected = tape.sparse_matmul(scaled_anchor_transpose(s), z);
  return tape.scale(tape.sub(tape.sum_squares(z), tape.sum_squares(projected)), 2.0);
}

Tensor joint_loss(Tape& tape, const Tensor& anchor_learning, const Tensor& consistency,
                  const Tensor& structure, const LossWeights& w) {
  w.validate();
  return tape.add(anchor_learning, tape.add(tape.scale(consistency, w.alpha),
                                            tape.scale(structure, w.beta)));
}

} // namespace dmac
