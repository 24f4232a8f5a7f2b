#include "dmac/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "dmac/eval.hpp"

namespace dmac {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out)
    throw std::runtime_error("write failed for " + path.string());
}

std::string optional_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

void write_losses(const fs::path& path, const std::vector<LossRecord>& history) {
  auto out = open_output(path);
  out << "epoch,L,L_AL,L_CM,L_SP\n";
  for (std::size_t e = 0; e < history.size(); ++e) {
    const auto& r = history[e];
    out << e << ',' << format_double(r.total) << ',' << format_double(r.anchor_learning) << ','
        << format_double(r.consistency) << ',' << format_double(r.structure) << '\n';
  }
  finish(out, path);
}

std::optional<double> mean_of(const std::vector<RunSummary>& runs,
                              std::optional<double> RunSummary::*field) {
  double total = 0.0;
  for (const auto& r : runs) {
    if (!(r.*field))
      return std::nullopt;
    total += *(r.*field);
  }
  return total / static_cast<double>(runs.size());
}

} // namespace

void run_synth(const SynthOptions& opts) {
  save_dataset(generate_synthetic(opts.spec), opts.out, opts.format, true);
}

RunReport run_train(const TrainOptions& opts) {
  if (opts.repeats < 1)
    throw std::invalid_argument("repeats must be at least 1");
  opts.config.validate();
  const MultiViewDataset data = load_dataset(opts.data);
  for (const auto& w : data.warnings)
    std::cerr << "warning: " << w << '\n';

  RunReport report;
  report.config = config_to_json(opts.config);
  report.config["repeats"] = opts.repeats;
  report.config["data"] = opts.data.string();

  TrainResult first;
  for (std::size_t r = 0; r < opts.repeats; ++r) {
    TrainConfig cfg = opts.config;
    cfg.seed = opts.config.seed + r;
    TrainResult result = train(data, cfg);
    report.runs.push_back(summarize(result, cfg.seed));
    if (r == 0)
      first = std::move(result);
  }
  report.mean_acc = mean_of(report.runs, &RunSummary::acc);
  report.mean_nmi = mean_of(report.runs, &RunSummary::nmi);

  fs::create_directories(opts.out);
  const fs::path losses = opts.out / "losses.csv";
  const fs::path embedding = opts.out / "embedding.csv";
  const fs::path labels = opts.out / "labels.txt";
  const fs::path report_path = opts.out / "report.json";
  write_losses(losses, first.history);
  write_csv_matrix(embedding, first.embedding);
  write_labels(labels, first.labels);
  report.outputs = {{"losses", losses.string()},
                    {"embedding", embedding.string()},
                    {"labels", labels.string()},
                    {"report", report_path.string()}};
  if (opts.dump_graph) {
    fs::create_directories(*opts.dump_graph);
    for (std::size_t a = 0; a < first.graphs.size(); ++a) {
      const fs::path path = *opts.dump_graph / ("graph_view" + std::to_string(a) + ".txt");
      auto out = open_output(path);
      write_coordinates(out, first.graphs[a]);
      finish(out, path);
      report.outputs["graph_view" + std::to_string(a)] = path.string();
    }
  }

  auto out = open_output(report_path);
  out << report_to_json(report).dump(2) << '\n';
  finish(out, report_path);
  return report;
}

std::vector<GridCell> run_grid(const GridOptions& opts) {
  const MultiViewDataset data = load_dataset(opts.data);
  auto cells = grid_search(data, opts.config);
  const fs::path path = opts.out / "grid.csv";
  auto out = open_output(path);
  out << "alpha,beta,ACC,NMI,final_loss\n";
  for (const auto& c : cells)
    out << format_double(c.alpha) << ',' << format_double(c.beta) << ','
        << optional_field(c.result.acc) << ',' << optional_field(c.result.nmi) << ','
        << format_double(c.result.final_loss()) << '\n';
  finish(out, path);
  return cells;
}

BenchResult run_bench(const BenchOptions& opts) {
  using clock = std::chrono::steady_clock;
  BenchResult result;
  std::vector<MultiViewDataset> datasets;
  const auto setup_start = clock::now();
  for (std::size_t n : opts.sizes) {
    SyntheticSpec spec;
    spec.samples = n;
    spec.views = opts.views;
    spec.clusters = opts.clusters;
    spec.dims = {opts.dim};
    spec.seed = opts.seed;
    MultiViewDataset ds = generate_synthetic(spec);
    for (auto& v : ds.views)
      v = l2_normalize_rows(v).matrix;
    datasets.push_back(std::move(ds));
  }
  result.setup_seconds = std::chrono::duration<double>(clock::now() - setup_start).count();

  if (opts.epochs > 0) {
    for (const auto& ds : datasets) {
      TrainConfig cfg;
      cfg.anchors = opts.anchors;
      cfg.epochs = opts.epochs;
      cfg.seed = opts.seed;
      cfg.final_restarts = 1;
      const TrainResult r = train(ds, cfg);
      const auto& t = r.epoch_seconds;
      const std::size_t skip = t.size() > 1 ? 1 : 0;
      const double fastest = *std::min_element(t.begin() + static_cast<std::ptrdiff_t>(skip), t.end());
      result.rows.push_back({ds.samples(), opts.anchors, fastest});
    }
  }

  if (opts.out) {
    auto out = open_output(*opts.out);
    out << "n,m,seconds_per_epoch\n";
    for (const auto& row : result.rows)
      out << row.samples << ',' << row.anchors << ',' << format_double(row.seconds_per_epoch) << '\n';
    finish(out, *opts.out);
  }
  return result;
}

double scaling_exponent(const std::vector<BenchRow>& rows) {
  if (rows.size() < 2)
    throw std::invalid_argument("scaling exponent needs at least two sizes");
  double mx = 0.0, my = 0.0;
  for (const auto& r : rows) {
    mx += std::log(static_cast<double>(r.samples));
    my += std::log(r.seconds_per_epoch);
  }
  mx /= static_cast<double>(rows.size());
  my /= static_cast<double>(rows.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& r : rows) {
    const double dx = std::log(static_cast<double>(r.samples)) - mx;
    sxy += dx * (std::log(r.seconds_per_epoch) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0)
    throw std::invalid_argument("scaling exponent needs distinct sizes");
  return sxy / sxx;
}

EvalScores run_eval(const fs::path& predicted, const fs::path& truth) {
  const auto pred = read_labels(predicted);
  const auto ref = read_labels(truth);
  if (pred.size() != ref.size())
    throw std::invalid_argument("label files differ in length: " + std::to_string(pred.size()) +
                                " vs " + std::to_string(ref.size()));
  return {accuracy(pred, ref), nmi(pred, ref)};
}

} // namespace dmac
