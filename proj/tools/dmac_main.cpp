#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dmac/commands.hpp"

namespace {

struct TrainArgs {
  std::string data;
  std::string out = "dmac_out";
  std::string config;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t anchors = 0;
  std::size_t knn = 0;
  double lr = 0.0;
  std::size_t epochs = 0;
  std::uint64_t seed = 0;
  bool wo_pd = false;
  bool wo_cm = false;
  std::vector<double> alpha_grid;
  std::vector<double> beta_grid;
};

void add_train_flags(CLI::App* sub, TrainArgs& a) {
  sub->add_option("--data", a.data, "dataset directory (with manifest.json)")->required();
  sub->add_option("--out", a.out, "output directory");
  sub->add_option("--config", a.config, "JSON config file; flags override it");
  sub->add_option("--alpha", a.alpha, "consistency loss weight");
  sub->add_option("--beta", a.beta, "structure preservation loss weight");
  sub->add_option("--anchors", a.anchors, "anchor count (default floor(sqrt(n*c)))");
  sub->add_option("--knn", a.knn, "nonzero anchors per sample");
  sub->add_option("--lr", a.lr, "RMSprop learning rate");
  sub->add_option("--epochs", a.epochs, "training epochs");
  sub->add_option("--seed", a.seed, "random seed");
  sub->add_flag("--wo-pd", a.wo_pd, "disable the anchor perturbation");
  sub->add_flag("--wo-cm", a.wo_cm, "drop the consistency loss from the objective");
}

dmac::TrainConfig build_config(const CLI::App* sub, const TrainArgs& a) {
  dmac::TrainConfig cfg;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in)
      throw std::invalid_argument("cannot read config file " + a.config);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("config file " + a.config + ": " + e.what());
    }
    dmac::apply_config_json(cfg, j);
  }
  auto given = [sub](const char* name) {
    const CLI::Option* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--alpha"))
    cfg.weights.alpha = a.alpha;
  if (given("--beta"))
    cfg.weights.beta = a.beta;
  if (given("--anchors"))
    cfg.anchors = a.anchors;
  if (given("--knn"))
    cfg.k_neighbors = a.knn;
  if (given("--lr"))
    cfg.optimizer.learning_rate = a.lr;
  if (given("--epochs"))
    cfg.epochs = a.epochs;
  if (given("--seed"))
    cfg.seed = a.seed;
  if (a.wo_pd)
    cfg.disable_perturbation = true;
  if (a.wo_cm)
    cfg.disable_consistency = true;
  if (given("--alpha-grid"))
    cfg.alpha_grid = a.alpha_grid;
  if (given("--beta-grid"))
    cfg.beta_grid = a.beta_grid;
  cfg.validate();
  return cfg;
}

std::string metric(const std::optional<double>& v) {
  return v ? dmac::format_double(*v) : std::string("n/a");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep multi-view anchor clustering"};
  app.require_subcommand(1);

  dmac::SynthOptions synth;
  std::string synth_out;
  std::string synth_format = "binary";
  auto* synth_cmd = app.add_subcommand("synth", "generate a Gaussian-blob multi-view dataset");
  synth_cmd->add_option("--n", synth.spec.samples, "samples");
  synth_cmd->add_option("--views", synth.spec.views, "views");
  synth_cmd->add_option("--clusters", synth.spec.clusters, "clusters");
  synth_cmd->add_option("--dims", synth.spec.dims, "feature width per view (one value or one per view)");
  synth_cmd->add_option("--spread", synth.spec.spread, "std-dev of cluster centers");
  synth_cmd->add_option("--noise", synth.spec.noise, "std-dev of within-cluster noise");
  synth_cmd->add_option("--seed", synth.spec.seed, "random seed");
  synth_cmd->add_option("--format", synth_format, "view file format")
      ->check(CLI::IsMember({"binary", "csv"}));
  synth_cmd->add_option("--out", synth_out, "output directory")->required();

  TrainArgs train_args;
  std::size_t repeats = 1;
  std::string dump_graph;
  auto* train_cmd = app.add_subcommand("train", "train and cluster a dataset");
  add_train_flags(train_cmd, train_args);
  train_cmd->add_option("--repeats", repeats, "independent runs with seeds seed, seed+1, ...");
  train_cmd->add_option("--dump-graph", dump_graph, "directory for anchor graph coordinate files");

  TrainArgs grid_args;
  auto* grid_cmd = app.add_subcommand("grid", "train over the alpha/beta grid");
  add_train_flags(grid_cmd, grid_args);
  grid_cmd->add_option("--alpha-grid", grid_args.alpha_grid, "alpha values");
  grid_cmd->add_option("--beta-grid", grid_args.beta_grid, "beta values");

  dmac::BenchOptions bench;
  std::string bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "per-epoch time against sample count");
  bench_cmd->add_option("--sizes", bench.sizes, "sample counts");
  bench_cmd->add_option("--anchors", bench.anchors, "fixed anchor count");
  bench_cmd->add_option("--epochs", bench.epochs, "epochs per size");
  bench_cmd->add_option("--views", bench.views, "views");
  bench_cmd->add_option("--clusters", bench.clusters, "clusters");
  bench_cmd->add_option("--dim", bench.dim, "feature width per view");
  bench_cmd->add_option("--seed", bench.seed, "random seed");
  bench_cmd->add_option("--out", bench_out, "CSV output file");

  std::string pred_path;
  std::string truth_path;
  auto* eval_cmd = app.add_subcommand("eval", "score predicted labels against ground truth");
  eval_cmd->add_option("--pred", pred_path, "predicted labels, one per line")->required();
  eval_cmd->add_option("--truth", truth_path, "true labels, one per line")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*synth_cmd) {
      synth.out = synth_out;
      synth.format = synth_format == "csv" ? dmac::ViewFormat::csv : dmac::ViewFormat::binary;
      dmac::run_synth(synth);
      std::cout << "wrote " << synth.out.string() << '\n';
    } else if (*train_cmd) {
      dmac::TrainOptions opts;
      opts.data = train_args.data;
      opts.out = train_args.out;
      opts.config = build_config(train_cmd, train_args);
      opts.repeats = repeats;
      if (!dump_graph.empty())
        opts.dump_graph = dump_graph;
      const auto report = dmac::run_train(opts);
      for (const auto& r : report.runs)
        std::cout << "seed " << r.seed << ": ACC " << metric(r.acc) << " NMI " << metric(r.nmi)
                  << " final loss " << dmac::format_double(r.final_loss) << '\n';
      std::cout << "mean ACC " << metric(report.mean_acc) << " mean NMI "
                << metric(report.mean_nmi) << " (NMI normalization: "
                << report.nmi_normalization << ")\n";
    } else if (*grid_cmd) {
      dmac::GridOptions opts;
      opts.data = grid_args.data;
      opts.out = grid_args.out;
      opts.config = build_config(grid_cmd, grid_args);
      const auto cells = dmac::run_grid(opts);
      const auto& best = cells.front();
      std::cout << cells.size() << " cells; best alpha " << dmac::format_double(best.alpha)
                << " beta " << dmac::format_double(best.beta) << " ACC "
                << metric(best.result.acc) << '\n';
    } else if (*bench_cmd) {
      if (!bench_out.empty())
        bench.out = bench_out;
      const auto result = dmac::run_bench(bench);
      std::cout << "setup " << dmac::format_double(result.setup_seconds) << " s\n";
      std::cout << "n,m,seconds_per_epoch\n";
      for (const auto& row : result.rows)
        std::cout << row.samples << ',' << row.anchors << ','
                  << dmac::format_double(row.seconds_per_epoch) << '\n';
      if (result.rows.size() >= 2)
        std::cout << "log-log exponent " << dmac::format_double(dmac::scaling_exponent(result.rows))
                  << '\n';
    } else if (*eval_cmd) {
      const auto scores = dmac::run_eval(pred_path, truth_path);
      std::cout << "ACC " << dmac::format_double(scores.acc) << " NMI "
                << dmac::format_double(scores.nmi) << '\n';
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
