#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dmac/agcn.hpp"
#include "dmac/anchor.hpp"
#include "dmac/dataio.hpp"
#include "dmac/embed.hpp"
#include "dmac/graph.hpp"
#include "dmac/losses.hpp"
#include "dmac/optim.hpp"

namespace dmac {

/// Raised when a loss component stops being finite during training.
class NonFiniteLoss : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  LossWeights weights;
  std::vector<double> alpha_grid{1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  std::vector<double> beta_grid{1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  std::optional<std::size_t> anchors; ///< default ⌊√(n·c)⌋
  std::size_t k_neighbors = 5;        ///< clamped to m − 1
  EncoderSpec encoder;
  AgcnSpec agcn;
  RmspropConfig optimizer;
  std::size_t epochs = 100;
  std::size_t anchor_refresh = 20; ///< recompute Û and redraw ϵ every this many epochs
  std::uint64_t seed = 0;
  bool disable_perturbation = false;
  bool disable_consistency = false;
  std::size_t final_restarts = 10;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct LossRecord {
  double total = 0.0;
  double anchor_learning = 0.0;
  double consistency = 0.0;
  double structure = 0.0;
  std::vector<double> anchor_learning_views;
};

struct TrainResult {
  Matrix embedding;        ///< final fused Z, n × d_z
  std::vector<int> labels; ///< k-means on the final Z
  std::vector<LossRecord> history;
  std::vector<double> epoch_seconds;
  std::optional<double> acc;
  std::optional<double> nmi;
  std::size_t anchor_count = 0;
  std::size_t neighbors = 0;
  Matrix initial_anchors; ///< Û in effect at the end
  Matrix final_anchors;   ///< U at the end
  std::vector<AnchorGraph> graphs;

  double final_loss() const { return history.empty() ? 0.0 : history.back().total; }
};

/// Every trainable piece: per-view encoders, the perturbation networks and
/// per-view AGCNs.
class DmacModel {
public:
  DmacModel(std::span<const std::size_t> view_dims, std::size_t clusters,
            const EncoderSpec& encoder, const AgcnSpec& agcn, std::uint64_t seed);

  std::vector<Tensor> parameters() const;
  std::size_t embed_dim() const { return encoders.front().output_width(); }

  std::vector<Mlp> encoders;
  PerturbNet perturbation;
  std::vector<Agcn> agcns;
};

/// Quantities held fixed while one loss evaluation is differentiated.
struct AnchorContext {
  Matrix initial_anchors; ///< Û
  Matrix base_noise;      ///< ϵ
  std::vector<AnchorGraph> graphs;
  std::vector<Matrix> propagation;
};

struct ForwardOptions {
  LossWeights weights;
  std::size_t neighbors = 5;
  bool disable_perturbation = false;
  bool disable_consistency = false;
};

struct Encoded {
  std::vector<Tensor> views;
  Tensor fused;
};

struct ForwardPass {
  Encoded embeddings;
  Tensor anchors;
  std::vector<Tensor> similarities;
  std::vector<Tensor> distributions;
  std::vector<Tensor> anchor_learning_views;
  Tensor anchor_learning;
  Tensor consistency;
  Tensor structure;
  Tensor total;
};

Encoded encode_views(Tape& tape, const DmacModel& model, std::span<const Matrix> views);

/// Builds the joint loss from encoded views. With `rebuild_graphs` the
/// anchor graphs and propagation operators in `ctx` are recomputed from the
/// detached embeddings and anchors first; otherwise the stored ones are used.
ForwardPass forward_loss(Tape& tape, const DmacModel& model, Encoded embeddings,
                         AnchorContext& ctx, const ForwardOptions& opts, bool rebuild_graphs);

TrainResult train(const MultiViewDataset& data, const TrainConfig& cfg);

struct GridCell {
  double alpha = 0.0;
  double beta = 0.0;
  TrainResult result;
};

/// Trains every (α, β) pair of the config's grids. Sorted best first: by ACC
/// when labels exist, otherwise by final loss.
std::vector<GridCell> grid_search(const MultiViewDataset& data, const TrainConfig& cfg);

/// Worker cap from DMAC_THREADS, else the hardware concurrency.
std::size_t worker_threads();

} // namespace dmac
