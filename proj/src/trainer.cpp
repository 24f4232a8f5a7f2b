#include "dmac/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <mutex>
#include <thread>

#include "dmac/eval.hpp"
#include "dmac/random.hpp"

namespace dmac {

namespace {

enum Stream : std::uint64_t {
  kModelInit = 1,
  kAnchorInit = 2,
  kBaseNoise = 3,
  kFinalClustering = 4,
};

void check_finite(const ForwardPass& pass, std::size_t epoch) {
  const std::pair<const char*, const Tensor*> parts[] = {
      {"anchor learning loss", &pass.anchor_learning},
      {"consistency loss", &pass.consistency},
      {"structure preservation loss", &pass.structure},
      {"joint loss", &pass.total},
  };
  for (const auto& [name, t] : parts)
    if (!std::isfinite(t->item()))
      throw NonFiniteLoss(std::string(name) + " became non-finite at epoch " +
                          std::to_string(epoch));
}

LossRecord record_of(const ForwardPass& pass) {
  LossRecord r;
  r.total = pass.total.item();
  r.anchor_learning = pass.anchor_learning.item();
  r.consistency = pass.consistency.item();
  r.structure = pass.structure.item();
  for (const auto& t : pass.anchor_learning_views)
    r.anchor_learning_views.push_back(t.item());
  return r;
}

ForwardPass checked_forward(Tape& tape, const DmacModel& model, Encoded enc, AnchorContext& ctx,
                            const ForwardOptions& opts, std::size_t epoch) {
  ForwardPass pass;
  try {
    pass = forward_loss(tape, model, std::move(enc), ctx, opts, true);
  } catch (const ContractError& e) {
    // overflowed embeddings zero out every Student-t kernel in a row
    throw NonFiniteLoss("anchor learning loss became non-finite at epoch " +
                        std::to_string(epoch) + " (" + e.what() + ")");
  }
  check_finite(pass, epoch);
  return pass;
}

} // namespace

void TrainConfig::validate() const {
  weights.validate();
  optimizer.validate();
  if (epochs < 1)
    throw std::invalid_argument("epochs must be at least 1");
  if (anchor_refresh < 1)
    throw std::invalid_argument("anchor_refresh must be at least 1");
  if (k_neighbors < 1)
    throw std::invalid_argument("k_neighbors must be at least 1");
  if (anchors && *anchors < 2)
    throw std::invalid_argument("anchors must be at least 2");
  if (alpha_grid.empty())
    throw std::invalid_argument("alpha_grid must be nonempty");
  if (beta_grid.empty())
    throw std::invalid_argument("beta_grid must be nonempty");
  for (double a : alpha_grid)
    LossWeights{a, 0.0}.validate();
  for (double b : beta_grid)
    LossWeights{0.0, b}.validate();
  if (encoder.embed_dim < 1)
    throw std::invalid_argument("encoder.embed_dim must be positive");
}

DmacModel::DmacModel(std::span<const std::size_t> view_dims, std::size_t clusters,
                     const EncoderSpec& encoder, const AgcnSpec& agcn, std::uint64_t seed)
    : perturbation(encoder.embed_dim, mix_seed(seed, 1000)) {
  for (std::size_t a = 0; a < view_dims.size(); ++a) {
    encoders.push_back(make_encoder(view_dims[a], encoder, mix_seed(seed, a)));
    agcns.emplace_back(encoder.embed_dim, clusters, agcn, mix_seed(seed, 2000 + a));
  }
}

std::vector<Tensor> DmacModel::parameters() const {
  std::vector<Tensor> ps;
  for (const auto& e : encoders)
    for (auto& p : e.parameters())
      ps.push_back(p);
  for (auto& p : perturbation.parameters())
    ps.push_back(p);
  for (const auto& g : agcns)
    for (const auto& w : g.weights())
      ps.push_back(w);
  return ps;
}

Encoded encode_views(Tape& tape, const DmacModel& model, std::span<const Matrix> views) {
  if (views.size() != model.encoders.size())
    throw std::invalid_argument("model has " + std::to_string(model.encoders.size()) +
                                " encoders but " + std::to_string(views.size()) +
                                " views were given");
  Encoded e;
  for (std::size_t a = 0; a < views.size(); ++a)
    e.views.push_back(encode_view(tape, views[a], model.encoders[a]));
  e.fused = fuse(tape, e.views);
  return e;
}

ForwardPass forward_loss(Tape& tape, const DmacModel& model, Encoded embeddings,
                         AnchorContext& ctx, const ForwardOptions& opts, bool rebuild_graphs) {
  ForwardPass pass;
  pass.embeddings = std::move(embeddings);
  const auto& zs = pass.embeddings.views;

  if (opts.disable_perturbation) {
    pass.anchors = tape.constant(ctx.initial_anchors);
  } else {
    auto pert = generate_perturbation(tape, ctx.initial_anchors, model.perturbation, ctx.base_noise);
    pass.anchors = perturbed_anchors(tape, ctx.initial_anchors, pert.epsilon);
  }

  if (rebuild_graphs) {
    ctx.graphs.clear();
    ctx.propagation.clear();
    const std::size_t k = std::min(opts.neighbors, pass.anchors.rows() - 1);
    for (const auto& z : zs) {
      ctx.graphs.push_back(solve_anchor_graph(z.value(), pass.anchors.value(), k));
      ctx.propagation.push_back(propagation_operator(ctx.graphs.back()));
    }
  }

  for (std::size_t a = 0; a < zs.size(); ++a) {
    pass.similarities.push_back(anchor_similarity(tape, zs[a], pass.anchors));
    pass.distributions.push_back(model.agcns[a].forward(tape, ctx.propagation[a], pass.anchors));
    pass.anchor_learning_views.push_back(
        anchor_learning_loss(tape, std::span(&pass.similarities.back(), 1)));
  }
  pass.anchor_learning = pass.anchor_learning_views.front();
  for (std::size_t a = 1; a < zs.size(); ++a)
    pass.anchor_learning = tape.add(pass.anchor_learning, pass.anchor_learning_views[a]);

  pass.consistency = zs.size() > 1 ? consistency_loss(tape, pass.distributions)
                                   : tape.constant(Matrix(1, 1, 0.0));

  for (std::size_t a = 0; a < zs.size(); ++a) {
    Tensor sp = structure_preservation_loss(tape, pass.embeddings.fused, ctx.graphs[a]);
    pass.structure = pass.structure.defined() ? tape.add(pass.structure, sp) : sp;
  }

  // wo/CM: the consistency value is still reported but never reaches the joint loss
  const Tensor consistency_term =
      opts.disable_consistency ? tape.constant(Matrix(1, 1, 0.0)) : pass.consistency;
  pass.total =
      joint_loss(tape, pass.anchor_learning, consistency_term, pass.structure, opts.weights);
  return pass;
}

TrainResult train(const MultiViewDataset& data, const TrainConfig& cfg) {
  data.validate();
  cfg.validate();
  const std::size_t n = data.samples();
  const std::size_t c = data.clusters;
  const std::size_t m = cfg.anchors.value_or(anchor_count(n, c));
  if (m > n)
    throw std::invalid_argument("anchors = " + std::to_string(m) + " exceeds n = " +
                                std::to_string(n));
  if (data.view_count() < 2)
    std::cerr << "warning: single-view dataset; consistency loss contributes 0\n";

  const auto dims = data.view_dims();
  DmacModel model(dims, c, cfg.encoder, cfg.agcn, mix_seed(cfg.seed, kModelInit));
  Rmsprop optimizer(model.parameters(), cfg.optimizer);
  const ForwardOptions opts{cfg.weights, cfg.k_neighbors, cfg.disable_perturbation,
                            cfg.disable_consistency};

  TrainResult result;
  result.anchor_count = m;
  result.neighbors = std::min(cfg.k_neighbors, m - 1);
  AnchorContext ctx;

  using clock = std::chrono::steady_clock;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = clock::now();
    Tape tape;
    optimizer.zero_grad();
    Encoded enc = encode_views(tape, model, data.views);
    if (epoch % cfg.anchor_refresh == 0) {
      ctx.initial_anchors =
          init_anchors(enc.fused.value(), m, mix_seed(mix_seed(cfg.seed, kAnchorInit), epoch));
      ctx.base_noise = standard_normal(m, model.embed_dim(),
                                       mix_seed(mix_seed(cfg.seed, kBaseNoise), epoch));
    }
    ForwardPass pass = checked_forward(tape, model, std::move(enc), ctx, opts, epoch);
    result.history.push_back(record_of(pass));
    tape.backward(pass.total);
    optimizer.step();
    result.epoch_seconds.push_back(std::chrono::duration<double>(clock::now() - start).count());
  }

  // final state with the trained parameters
  Tape tape;
  ForwardPass last =
      checked_forward(tape, model, encode_views(tape, model, data.views), ctx, opts, cfg.epochs);
  result.embedding = last.embeddings.fused.value();
  result.initial_anchors = ctx.initial_anchors;
  result.final_anchors = last.anchors.value();
  result.graphs = ctx.graphs;
  result.labels = kmeans(result.embedding, c, mix_seed(cfg.seed, kFinalClustering),
                         {.restarts = cfg.final_restarts, .max_iterations = 300})
                      .labels;
  if (data.labels) {
    result.acc = accuracy(result.labels, *data.labels);
    result.nmi = nmi(result.labels, *data.labels);
  }
  return result;
}

std::size_t worker_threads() {
  if (const char* env = std::getenv("DMAC_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1)
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid DMAC_THREADS='" << env << "'\n";
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<GridCell> grid_search(const MultiViewDataset& data, const TrainConfig& cfg) {
  cfg.validate();
  std::vector<GridCell> cells;
  for (double a : cfg.alpha_grid)
    for (double b : cfg.beta_grid)
      cells.push_back({a, b, {}});

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        TrainConfig cell = cfg;
        cell.weights = {cells[i].alpha, cells[i].beta};
        cells[i].result = train(data, cell);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(worker_threads(), cells.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t)
    pool.emplace_back(worker);
  worker();
  for (auto& t : pool)
    t.join();
  if (failure)
    std::rethrow_exception(failure);

  const bool by_acc = data.labels.has_value();
  std::stable_sort(cells.begin(), cells.end(), [by_acc](const GridCell& x, const GridCell& y) {
    if (by_acc)
      return *x.result.acc > *y.result.acc;
    return x.result.final_loss() < y.result.final_loss();
  });
  return cells;
}

} // namespace dmac
