#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "dmac/dataio.hpp"
#include "dmac/report.hpp"
#include "dmac/trainer.hpp"

namespace dmac {

struct SynthOptions {
  SyntheticSpec spec;
  std::filesystem::path out;
  ViewFormat format = ViewFormat::binary;
};

/// Generates blobs and writes them as a dataset directory that normalizes on load.
void run_synth(const SynthOptions& opts);

struct TrainOptions {
  std::filesystem::path data;
  std::filesystem::path out;
  TrainConfig config;
  std::size_t repeats = 1; ///< run r uses seed + r
  std::optional<std::filesystem::path> dump_graph;
};

/// Trains, writes report.json, losses.csv, embedding.csv and labels.txt into
/// `out` (artifacts from the first run) and returns the report.
RunReport run_train(const TrainOptions& opts);

struct GridOptions {
  std::filesystem::path data;
  std::filesystem::path out;
  TrainConfig config;
};

/// Writes `out/grid.csv` with columns alpha, beta, ACC, NMI, final_loss,
/// best cell first.
std::vector<GridCell> run_grid(const GridOptions& opts);

struct BenchOptions {
  std::vector<std::size_t> sizes{1000, 2000, 4000};
  std::size_t anchors = 50;
  std::size_t epochs = 7;
  std::size_t views = 2;
  std::size_t clusters = 3;
  std::size_t dim = 20;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> out; ///< CSV destination
};

struct BenchRow {
  std::size_t samples = 0;
  std::size_t anchors = 0;
  double seconds_per_epoch = 0.0;
};

struct BenchResult {
  double setup_seconds = 0.0;
  std::vector<BenchRow> rows;
};

/// Per-epoch wall time at each size: the fastest epoch, so that load from
/// other processes does not inflate it. The first epoch carries anchor
/// initialization and is skipped whenever more than one ran.
BenchResult run_bench(const BenchOptions& opts);

/// Least-squares slope of log(seconds) against log(n).
double scaling_exponent(const std::vector<BenchRow>& rows);

struct EvalScores {
  double acc = 0.0;
  double nmi = 0.0;
};

EvalScores run_eval(const std::filesystem::path& predicted, const std::filesystem::path& truth);

} // namespace dmac
