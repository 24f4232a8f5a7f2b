// Acceptance gate: one line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dmac/commands.hpp"
#include "dmac/eval.hpp"
#include "dmac/random.hpp"
#include "dmac/trainer.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace {

using namespace dmac;
namespace fs = std::filesystem;
using fixture::blobs;
using fixture::normalized;
using fixture::random_matrix;
using fixture::uniform_int;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome gradient_integrity() {
  const auto start = std::chrono::steady_clock::now();
  SyntheticSpec spec;
  spec.samples = 12;
  spec.views = 2;
  spec.clusters = 3;
  spec.dims = {4, 3};
  spec.seed = 11;
  const auto data = normalized(generate_synthetic(spec));

  EncoderSpec enc;
  enc.hidden = {6};
  enc.embed_dim = 5;
  AgcnSpec agcn;
  agcn.hidden = {4};
  DmacModel model(data.view_dims(), 3, enc, agcn, 5);
  const std::size_t m = 4;
  const ForwardOptions opts{{0.7, 0.3}, 2, false, false};

  AnchorContext ctx;
  {
    Tape tape;
    Encoded e = encode_views(tape, model, data.views);
    ctx.initial_anchors = init_anchors(e.fused.value(), m, 3);
    ctx.base_noise = standard_normal(m, enc.embed_dim, 4);
    forward_loss(tape, model, std::move(e), ctx, opts, true);
  }
  auto loss = [&] {
    Tape tape;
    return forward_loss(tape, model, encode_views(tape, model, data.views), ctx, opts, false)
        .total.item();
  };

  auto params = model.parameters();
  {
    Tape tape;
    auto pass = forward_loss(tape, model, encode_views(tape, model, data.views), ctx, opts, false);
    tape.backward(pass.total);
  }
  double worst = 0.0;
  for (auto& p : params) {
    const Matrix analytic = p.grad();
    worst = std::max(worst, oracle::relative_error(analytic, oracle::numeric_gradient(p, loss)));
  }
  const double elapsed = seconds_since(start);
  return {worst < 1e-5 && elapsed < 10.0,
          "max relative error " + num(worst) + " over " + std::to_string(params.size()) +
              " parameter tensors, " + num(elapsed) + " s"};
}

Outcome anchor_graph_oracle() {
  std::mt19937_64 rng(2);
  double worst_entry = 0.0, worst_excess = -1e300;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = uniform_int(rng, 1, 16);
    const std::size_t m = uniform_int(rng, 2, 6);
    const std::size_t k = uniform_int(rng, 1, std::min<std::size_t>(4, m - 1));
    const std::size_t d = uniform_int(rng, 1, 5);
    const Matrix z = random_matrix(n, d, rng);
    const Matrix u = random_matrix(m, d, rng);
    const auto g = solve_anchor_graph(z, u, k);
    const Matrix s = g.weights.to_dense();
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> dist(m), closed(m);
      for (std::size_t j = 0; j < m; ++j) {
        dist[j] = squared_distance(z.row(i), u.row(j));
        closed[j] = s(i, j);
      }
      const auto ref = oracle::simplex_qp(dist, g.gamma[i]);
      for (std::size_t j = 0; j < m; ++j)
        worst_entry = std::max(worst_entry, std::abs(closed[j] - ref[j]));
      worst_excess = std::max(worst_excess, oracle::simplex_objective(dist, closed, g.gamma[i]) -
                                                oracle::simplex_objective(dist, ref, g.gamma[i]));
    }
  }
  return {worst_entry <= 1e-6 && worst_excess <= 1e-9,
          "max entry gap " + num(worst_entry) + ", max objective excess " + num(worst_excess)};
}

Outcome doubly_stochastic() {
  std::mt19937_64 rng(3);
  double g_asym = 0.0, g_sum = 0.0, a_row = 0.0, a_col = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = uniform_int(rng, 2, 40);
    const std::size_t m = uniform_int(rng, 2, 10);
    const std::size_t k = uniform_int(rng, 1, m);
    const std::size_t d = uniform_int(rng, 1, 6);
    const auto g = solve_anchor_graph(random_matrix(n, d, rng), random_matrix(m, d, rng), k);
    const Matrix full = full_sample_graph(g);
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0, col = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        g_asym = std::max(g_asym, std::abs(full(i, j) - full(j, i)));
        row += full(i, j);
        col += full(j, i);
      }
      g_sum = std::max({g_sum, std::abs(row - 1.0), std::abs(col - 1.0)});
    }
    const Matrix a = propagation_operator(g);
    for (std::size_t i = 0; i < m; ++i) {
      if (g.degrees[i] <= 0.0)
        continue;
      double row = 0.0, col = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        row += a(i, j);
        if (g.degrees[j] > 0.0)
          col += a(j, i);
      }
      a_row = std::max(a_row, std::abs(row - 1.0));
      a_col = std::max(a_col, std::abs(col - 1.0));
    }
  }
  return {g_asym <= 1e-12 && g_sum <= 1e-9 && a_row <= 1e-9 && a_col <= 1e-9,
          "G asymmetry " + num(g_asym) + ", G row/col sum error " + num(g_sum) +
              ", A row sum error " + num(a_row) + ", A column sum error " + num(a_col)};
}

Outcome collapse_penalty() {
  std::mt19937_64 rng(4);
  const std::size_t n = 20, m = 6, d = 4;
  double q_err = 0.0, al_err = 0.0;
  {
    Tape tape;
    const Tensor z = tape.constant(random_matrix(n, d, rng));
    Matrix same(m, d);
    const Matrix base = random_matrix(1, d, rng);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t c = 0; c < d; ++c)
        same(j, c) = base(0, c);
    const Tensor q = anchor_similarity(tape, z, tape.constant(same));
    for (double v : q.value().data())
      q_err = std::max(q_err, std::abs(v - 1.0 / static_cast<double>(m)));
    al_err = std::abs(anchor_learning_loss(tape, std::span(&q, 1)).item() -
                      std::log(static_cast<double>(m)));
  }
  double sp = 0.0, al_collapsed = 0.0;
  {
    Matrix z(n, d);
    const Matrix base = random_matrix(1, d, rng);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c)
        z(i, c) = base(0, c);
    const Matrix anchors = init_anchors(z, m, 9);
    Tape tape;
    const Tensor zt = tape.constant(z);
    sp = std::abs(structure_preservation_loss(tape, zt, solve_anchor_graph(z, anchors, 3)).item());
    const Tensor q = anchor_similarity(tape, zt, tape.constant(anchors));
    al_collapsed = std::abs(anchor_learning_loss(tape, std::span(&q, 1)).item() -
                            std::log(static_cast<double>(m)));
  }
  return {q_err <= 1e-12 && al_err <= 1e-12 && sp <= 1e-9 && al_collapsed <= 1e-12,
          "identical anchors: Q error " + num(q_err) + ", L_AL gap to log m " + num(al_err) +
              "; identical Z: |L_SP| " + num(sp) + ", L_AL gap to log m " + num(al_collapsed)};
}

Outcome trace_form() {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = uniform_int(rng, 2, 64);
    const std::size_t m = uniform_int(rng, 2, 12);
    const std::size_t k = uniform_int(rng, 1, m);
    const std::size_t d = uniform_int(rng, 1, 8);
    const Matrix z = random_matrix(n, d, rng);
    const auto g = solve_anchor_graph(z, random_matrix(m, d, rng), k);
    Tape tape;
    const double fast = structure_preservation_loss(tape, tape.constant(z), g).item();
    worst = std::max(worst, std::abs(fast - oracle::structure_double_sum(z, g.weights.to_dense())));
  }
  return {worst <= 1e-8, "max gap to the double sum " + num(worst)};
}

Matrix softmax_rows(const Matrix& x) {
  Matrix out = x;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = out.row(i);
    const double mx = *std::max_element(r.begin(), r.end());
    double s = 0.0;
    for (auto& v : r)
      s += (v = std::exp(v - mx));
    for (auto& v : r)
      v /= s;
  }
  return out;
}

Outcome mi_contract() {
  std::mt19937_64 rng(6);
  double asym = 0.0, lowest = 1e300;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = uniform_int(rng, 2, 12), c = uniform_int(rng, 2, 6);
    Tape tape;
    const Tensor fa = tape.constant(softmax_rows(random_matrix(m, c, rng)));
    const Tensor fb = tape.constant(softmax_rows(random_matrix(m, c, rng)));
    const double ab = mutual_information(tape, fa, fb).item();
    const double ba = mutual_information(tape, fb, fa).item();
    asym = std::max(asym, std::abs(ab - ba));
    lowest = std::min({lowest, ab, ba});
  }
  double constant_rows = 0.0;
  {
    const std::size_t m = 8, c = 4;
    Matrix flat(m, c);
    const Matrix row = softmax_rows(random_matrix(1, c, rng));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < c; ++j)
        flat(i, j) = row(0, j);
    Tape tape;
    constant_rows = std::abs(mutual_information(tape, tape.constant(flat),
                                                tape.constant(softmax_rows(random_matrix(m, c, rng))))
                                 .item());
  }
  double identity_gap = 0.0;
  for (std::size_t c = 2; c <= 6; ++c) {
    Tape tape;
    const Tensor eye = tape.constant(Matrix::identity(c));
    identity_gap = std::max(identity_gap, std::abs(mutual_information(tape, eye, eye).item() -
                                                   std::log(static_cast<double>(c))));
  }
  return {asym <= 1e-12 && lowest >= -1e-12 && constant_rows <= 1e-12 && identity_gap <= 1e-9,
          "asymmetry " + num(asym) + ", min MI " + num(lowest) + ", constant-row MI " +
              num(constant_rows) + ", identity gap to log c " + num(identity_gap)};
}

Outcome metric_correctness() {
  std::mt19937_64 rng(7);
  bool permutation_ok = true;
  std::size_t hungarian_mismatch = 0;
  double nmi_gap = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t c = uniform_int(rng, 1, 6);
    const std::size_t n = uniform_int(rng, 1, 60);
    std::vector<int> pred(n), truth(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = static_cast<int>(uniform_int(rng, 0, c - 1));
      truth[i] = static_cast<int>(uniform_int(rng, 0, c - 1));
    }
    const double acc = accuracy(pred, truth);
    std::vector<int> relabel(c);
    std::iota(relabel.begin(), relabel.end(), 0);
    std::shuffle(relabel.begin(), relabel.end(), rng);
    std::vector<int> permuted(n);
    for (std::size_t i = 0; i < n; ++i)
      permuted[i] = relabel[static_cast<std::size_t>(pred[i])];
    permutation_ok = permutation_ok && accuracy(permuted, truth) == acc;
    hungarian_mismatch += acc != oracle::brute_force_accuracy(pred, truth);
    nmi_gap = std::max(nmi_gap, std::abs(nmi(pred, truth) - oracle::nmi_reference(pred, truth)));
  }
  return {permutation_ok && hungarian_mismatch == 0 && nmi_gap <= 1e-12,
          std::string("permutation invariance ") + (permutation_ok ? "exact" : "violated") +
              ", Hungarian/brute-force mismatches " + std::to_string(hungarian_mismatch) +
              ", max NMI gap " + num(nmi_gap)};
}

Outcome end_to_end() {
  const auto start = std::chrono::steady_clock::now();
  const auto result = train(blobs(), TrainConfig{});
  const double elapsed = seconds_since(start);
  return {*result.acc >= 0.95 && *result.nmi >= 0.90 && elapsed < 60.0,
          "ACC " + num(*result.acc) + ", NMI " + num(*result.nmi) + ", " + num(elapsed) + " s"};
}

Outcome linear_time() {
  BenchOptions opts;
  opts.sizes = {1000, 2000, 4000};
  opts.anchors = 50;
  const auto rows = run_bench(opts).rows;
  const double ratio = rows[1].seconds_per_epoch / rows[0].seconds_per_epoch;
  const double exponent = scaling_exponent(rows);
  std::string times;
  for (const auto& r : rows)
    times += " n=" + std::to_string(r.samples) + ":" + num(r.seconds_per_epoch) + "s";
  return {ratio <= 2.5 && exponent <= 1.3,
          "t(2000)/t(1000) " + num(ratio) + ", log-log exponent " + num(exponent) + ";" + times};
}

Outcome ablation_direction() {
  const auto data = blobs();
  double full = 0.0, wo_pd = 0.0, wo_cm = 0.0;
  const int seeds = 5;
  for (int s = 0; s < seeds; ++s) {
    TrainConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(s);
    full += *train(data, cfg).acc;
    TrainConfig pd = cfg;
    pd.disable_perturbation = true;
    wo_pd += *train(data, pd).acc;
    TrainConfig cm = cfg;
    cm.disable_consistency = true;
    wo_cm += *train(data, cm).acc;
  }
  full /= seeds;
  wo_pd /= seeds;
  wo_cm /= seeds;
  return {full >= wo_pd && full >= wo_cm - 0.02,
          "mean ACC full " + num(full) + ", wo/PD " + num(wo_pd) + ", wo/CM " + num(wo_cm)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

bool same_tree(const fs::path& a, const fs::path& b) {
  std::vector<std::string> names_a, names_b;
  for (const auto& e : fs::directory_iterator(a))
    names_a.push_back(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(b))
    names_b.push_back(e.path().filename().string());
  std::sort(names_a.begin(), names_a.end());
  std::sort(names_b.begin(), names_b.end());
  if (names_a != names_b)
    return false;
  for (const auto& name : names_a)
    if (slurp(a / name) != slurp(b / name))
      return false;
  return true;
}

bool same_history(const std::vector<LossRecord>& a, const std::vector<LossRecord>& b) {
  if (a.size() != b.size())
    return false;
  for (std::size_t e = 0; e < a.size(); ++e)
    if (std::memcmp(&a[e].total, &b[e].total, sizeof(double)) != 0 ||
        std::memcmp(&a[e].anchor_learning, &b[e].anchor_learning, sizeof(double)) != 0 ||
        std::memcmp(&a[e].consistency, &b[e].consistency, sizeof(double)) != 0 ||
        std::memcmp(&a[e].structure, &b[e].structure, sizeof(double)) != 0)
      return false;
  return true;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "dmac_acceptance_determinism";
  fs::remove_all(root);

  SynthOptions synth;
  synth.spec.seed = 7;
  synth.out = root / "synth_a";
  run_synth(synth);
  synth.out = root / "synth_b";
  run_synth(synth);
  const bool synth_same = same_tree(root / "synth_a", root / "synth_b");

  TrainOptions opts;
  opts.data = root / "synth_a";
  opts.config.epochs = 30;
  opts.config.seed = 3;
  opts.out = root / "train_a";
  const auto first = run_train(opts);
  opts.out = root / "train_b";
  const auto second = run_train(opts);
  const bool train_same = same_history(first.runs[0].history, second.runs[0].history) &&
                          slurp(root / "train_a" / "losses.csv") ==
                              slurp(root / "train_b" / "losses.csv") &&
                          slurp(root / "train_a" / "labels.txt") ==
                              slurp(root / "train_b" / "labels.txt");

  GridOptions grid;
  grid.data = root / "synth_a";
  grid.config.epochs = 10;
  grid.config.alpha_grid = {0.1, 1.0};
  grid.config.beta_grid = {0.01};
  grid.out = root / "grid_a";
  const auto ga = run_grid(grid);
  grid.out = root / "grid_b";
  const auto gb = run_grid(grid);
  bool grid_same = ga.size() == gb.size();
  for (std::size_t i = 0; grid_same && i < ga.size(); ++i)
    grid_same = same_history(ga[i].result.history, gb[i].result.history);

  fs::remove_all(root);
  return {synth_same && train_same && grid_same,
          std::string("synth ") + (synth_same ? "identical" : "differs") + ", train " +
              (train_same ? "identical" : "differs") + ", grid " +
              (grid_same ? "identical" : "differs")};
}

} // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"gradient integrity", gradient_integrity},
      {"anchor graph oracle equivalence", anchor_graph_oracle},
      {"doubly stochastic invariants", doubly_stochastic},
      {"collapse penalty", collapse_penalty},
      {"trace form equivalence", trace_form},
      {"mutual information contract", mi_contract},
      {"metric correctness", metric_correctness},
      {"end-to-end clustering", end_to_end},
      {"linear-time scaling", linear_time},
      {"ablation direction", ablation_direction},
      {"determinism", determinism},
  };
  int failures = 0;
  int index = 1;
  for (const auto& [name, check] : criteria) {
    Outcome out;
    try {
      out = check();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    failures += !out.pass;
    std::printf("[%s] %2d %s: %s\n", out.pass ? "PASS" : "FAIL", index++, name, out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", index - 1 - failures, index - 1);
  return failures == 0 ? 0 : 1;
}
