#include "dmac/anchor.hpp"


#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dmac/eval.hpp"
#include "dmac/random.hpp"

namespace dmac {

std::size_t anchor_count(std::size_t n, std::size_t c) {
  if (n == 0 || c < 2)
    throw std::invalid_argument("anchor_count needs n >= 1 and c >= 2");
  auto m = static_cast<std::size_t>(std::sqrt(static_cast<double>(n) * static_cast<double>(c)));
  // guard against the sqrt landing one ulp below an exact square
  while ((m + 1) * (m + 1) <= n * c)
    ++m;
  while (m * m > n * c)
    --m;
  return std::min(std::max(m, c), n);
}

Matrix init_anchors(const Matrix& z, std::size_t m, std::uint64_t seed) {
  if (m == 0 || m > z.rows())
    throw std::invalid_argument("init_anchors: m = " + std::to_string(m) +
                                " must lie in [1, n = " + std::to_string(z.rows()) + "]");
  return kmeans(z, m, seed, {.restarts = 3, .max_iterations = 300}).centroids;
}

PerturbNet::PerturbNet(std::size_t embed_dim, std::uint64_t seed) {
  const std::size_t widths[] = {embed_dim, embed_dim, embed_dim};
  mean = Mlp(widths, Activation::relu, Activation::identity, true, mix_seed(seed, 0));
  deviation = Mlp(widths, Activation::relu, Activation::identity, true, mix_seed(seed, 1));
}

std::vector<Tensor> PerturbNet::parameters() const {
  auto ps = mean.parameters();
  for (auto& p : deviation.parameters())
    ps.push_back(p);
  return ps;
}

Perturbation generate_perturbation(Tape& tape, const Matrix& initial_anchors,
                                   const PerturbNet& net, const Matrix& base) {
  if (!base.same_shape(initial_anchors))
    throw ShapeError("perturbation base " + base.shape() + " vs anchors " +
                     initial_anchors.shape());
  const Tensor input = tape.constant(initial_anchors);
  Perturbation p;
  p.mean = net.mean.forward(tape, input);
  p.deviation = tape.softplus(net.deviation.forward(tape, input));
  p.epsilon = tape.add(p.mean, tape.hadamard(p.deviation, tape.constant(base)));
  return p;
}

Tensor perturbed_anchors(Tape& tape, const Matrix& initial_anchors, const Tensor& epsilon) {
  return tape.add(tape.constant(initial_anchors), epsilon);
}

Tensor anchor_similarity(Tape& tape, const Tensor& z, const Tensor& anchors) {
  if (z.cols() != anchors.cols())
    throw ShapeError("anchor_similarity: embedding width " + std::to_string(z.cols()) +
                     " vs anchor width " + std::to_string(anchors.cols()));
  return tape.normalize_rows(tape.student_t_kernel(tape.squared_distances(z, anchors)));
}

Tensor anchor_learning_loss(Tape& tape, std::span<const Tensor> similarities) {
  if (similarities.empty())
    throw std::invalid_argument("anchor_learning_loss needs at least one view");
  Tensor total = tape.mean_row_entropy(similarities.front(), kLogFloor);
  for (std::size_t a = 1; a < similarities.size(); ++a)
    total = tape.add(total, tape.mean_row_entropy(similarities[a], kLogFloor));
  return total;
}

} // namespace dmac
