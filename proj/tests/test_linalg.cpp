#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "dmac/autodiff.hpp"
#include "dmac/optim.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dmac;
using fixture::random_matrix;
using fixture::random_positive;

namespace {

using Op = std::function<Tensor(Tape&, std::vector<Tensor>&)>;

/// Checks the gradient of Σ (op(inputs) ⊙ R) for a random R against central
/// differences, for every input.
double op_gradient_error(const Op& op, std::vector<Matrix> inputs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Tensor> params;
  for (auto& m : inputs)
    params.push_back(Tensor::parameter(m));
  Matrix probe;
  auto loss = [&](Tape& tape) {
    Tensor out = op(tape, params);
    if (probe.empty())
      probe = random_matrix(out.rows(), out.cols(), rng);
    return tape.sum(tape.hadamard(out, tape.constant(probe)));
  };
  {
    Tape tape;
    tape.backward(loss(tape));
  }
  double worst = 0.0;
  for (auto& p : params) {
    const Matrix analytic = p.grad();
    const Matrix numeric = oracle::numeric_gradient(p, [&] {
      Tape tape;
      return loss(tape).item();
    });
    worst = std::max(worst, oracle::relative_error(analytic, numeric));
  }
  return worst;
}

} // namespace

TEST_CASE("matmul agrees with the identity and scalar cases") {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  CHECK(matmul(a, Matrix::identity(2)) == a);
  CHECK(matmul(Matrix::from_rows({{2}}), Matrix::from_rows({{3}}))(0, 0) == 6.0);
}

TEST_CASE("matmul variants match a triple loop") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto n = fixture::uniform_int(rng, 1, 16), k = fixture::uniform_int(rng, 1, 16),
               m = fixture::uniform_int(rng, 1, 16);
    const Matrix a = random_matrix(n, k, rng), b = random_matrix(k, m, rng);
    const Matrix ref = oracle::naive_matmul(a, b);
    CHECK(max_abs_diff(matmul(a, b), ref) <= 1e-12);
    CHECK(max_abs_diff(matmul_tn(transpose(a), b), ref) <= 1e-12);
    CHECK(max_abs_diff(matmul_nt(a, transpose(b)), ref) <= 1e-12);
  }
}

TEST_CASE("matmul rejects mismatched shapes") {
  CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
  Tape tape;
  CHECK_THROWS_AS(tape.matmul(tape.constant(Matrix(2, 3)), tape.constant(Matrix(2, 3))),
                  ShapeError);
}

TEST_CASE("sparse products match dense ones") {
  std::mt19937_64 rng(2);
  Matrix dense = random_matrix(7, 5, rng);
  for (auto& v : dense.data())
    if (v < 0.3)
      v = 0.0;
  const SparseMatrix s = SparseMatrix::from_dense(dense);
  const Matrix x = random_matrix(5, 3, rng), y = random_matrix(7, 3, rng);
  CHECK(s.to_dense() == dense);
  CHECK(max_abs_diff(s.multiply(x), oracle::naive_matmul(dense, x)) <= 1e-12);
  CHECK(max_abs_diff(s.transpose_multiply(y), oracle::naive_matmul(transpose(dense), y)) <= 1e-12);
  CHECK(s.transposed().to_dense() == transpose(dense));
}

TEST_CASE("softmax rows") {
  Tape tape;
  const Matrix half = tape.softmax_rows(tape.constant(Matrix::from_rows({{0, 0}}))).value();
  CHECK(half(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  for (double c : {-50.0, 0.0, 3.0, 700.0}) {
    const Matrix p =
        tape.softmax_rows(tape.constant(Matrix::from_rows({{c, c + std::log(3.0)}}))).value();
    CHECK(std::abs(p(0, 0) - 0.25) <= 1e-12);
    CHECK(std::abs(p(0, 1) - 0.75) <= 1e-12);
  }
  std::mt19937_64 rng(3);
  const Matrix x = random_matrix(4, 6, rng);
  const Matrix p = tape.softmax_rows(tape.constant(x)).value();
  Matrix shifted = x;
  for (std::size_t i = 0; i < 4; ++i)
    for (auto& v : shifted.row(i))
      v += 10.0 * static_cast<double>(i) - 7.0;
  const Matrix q = tape.softmax_rows(tape.constant(shifted)).value();
  for (std::size_t i = 0; i < 4; ++i) {
    double sum = 0.0;
    for (double v : p.row(i))
      sum += v;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
  CHECK(max_abs_diff(p, q) <= 1e-12);
}

TEST_CASE("backward on simple losses") {
  std::mt19937_64 rng(4);
  const Matrix x0 = random_matrix(3, 2, rng);
  Tensor x = Tensor::parameter(x0);
  Tensor unused = Tensor::parameter(Matrix(2, 2, 1.0));
  Tape tape;
  tape.backward(tape.sum_squares(x));
  for (std::size_t i = 0; i < x0.size(); ++i)
    CHECK(x.grad().data()[i] == doctest::Approx(2.0 * x0.data()[i]).epsilon(1e-15));
  CHECK(unused.grad() == Matrix(2, 2, 0.0));
  CHECK(tape.size() == 0);
}

TEST_CASE("backward requires a scalar") {
  Tensor x = Tensor::parameter(Matrix(2, 2, 1.0));
  Tape tape;
  CHECK_THROWS_AS(tape.backward(tape.scale(x, 2.0)), ContractError);
}

TEST_CASE("gradients accumulate across uses of one tensor") {
  Tensor x = Tensor::parameter(Matrix::from_rows({{3}}));
  Tape tape;
  tape.backward(tape.sum(tape.hadamard(x, x)));
  CHECK(x.grad()(0, 0) == 6.0);
}

TEST_CASE("every differentiable operation matches finite differences") {
  std::mt19937_64 rng(5);
  const double tol = 1e-5;
  auto m = [&](std::size_t r, std::size_t c) { return random_matrix(r, c, rng); };
  auto pos = [&](std::size_t r, std::size_t c) { return random_positive(r, c, rng); };

  SUBCASE("matmul") {
    CHECK(op_gradient_error([](Tape& t, auto& x) { return t.matmul(x[0], x[1]); },
                            {m(3, 4), m(4, 2)}, 1) < tol);
  }
  SUBCASE("transpose") {
    CHECK(op_gradient_error([](Tape& t, auto& x) { return t.transpose(x[0]); }, {m(3, 4)}, 2) <
          tol);
  }
  SUBCASE("add, sub, hadamard, scale") {
    CHECK(op_gradient_error(
              [](Tape& t, auto& x) {
                return t.scale(t.hadamard(t.add(x[0], x[1]), t.sub(x[0], x[1])), -1.5);
              },
              {m(3, 3), m(3, 3)}, 3) < tol);
  }
  SUBCASE("mean") {
    CHECK(op_gradient_error([](Tape& t, auto& x) { return t.mean(std::span(x)); },
                            {m(2, 3), m(2, 3), m(2, 3)}, 4) < tol);
  }
  SUBCASE("add_row") {
    CHECK(op_gradient_error([](Tape& t, auto& x) { return t.add_row(x[0], x[1]); },
                            {m(4, 3), m(1, 3)}, 5) < tol);
  }
  SUBCASE("relu away from the kink") {
    Matrix x = m(4, 4);
    for (auto& v : x.data())
      v += v >= 0 ? 0.1 : -0.1;
    CHECK(op_gradient_error([](Tape& t, auto& in) { return t.relu(in[0]); }, {x}, 6) < tol);
  }
  SUBCASE("tanh and softplus") {
    CHECK(op_gradient_error([](Tape& t, auto& x) { return t.tanh(x[0]); }, {m(3, 3)}, 7) < tol);
    CHECK(op_gradient_error([](Tape& t, auto& x) { return t.softplus(x[0]); }, {m(3, 3)}, 8) <
          tol);
  }
  SUBCASE("softmax_rows") {
    CHECK(op_gradient_error([](Tape& t, auto& x) { return t.softmax_rows(x[0]); }, {m(4, 6)}, 9) <
          tol);
  }
  SUBCASE("normalize_rows") {
    CHECK(op_gradient_error([](Tape& t, auto& x) { return t.normalize_rows(x[0]); }, {pos(4, 5)},
                            10) < tol);
  }
  SUBCASE("sum and sum_squares") {
    CHECK(op_gradient_error([](Tape& t, auto& x) { return t.sum(x[0]); }, {m(3, 2)}, 11) < tol);
    CHECK(op_gradient_error([](Tape& t, auto& x) { return t.sum_squares(x[0]); }, {m(3, 2)}, 12) <
          tol);
  }
  SUBCASE("sparse_matmul") {
    Matrix dense = pos(5, 4);
    dense(0, 1) = dense(2, 3) = dense(4, 0) = 0.0;
    const SparseMatrix s = SparseMatrix::from_dense(dense);
    CHECK(op_gradient_error([&](Tape& t, auto& x) { return t.sparse_matmul(s, x[0]); }, {m(4, 3)},
                            13) < tol);
  }
  SUBCASE("squared_distances") {
    CHECK(op_gradient_error([](Tape& t, auto& x) { return t.squared_distances(x[0], x[1]); },
                            {m(5, 3), m(4, 3)}, 14) < tol);
  }
  SUBCASE("student_t_kernel") {
    CHECK(op_gradient_error([](Tape& t, auto& x) { return t.student_t_kernel(x[0]); }, {pos(3, 4)},
                            15) < tol);
  }
  SUBCASE("mean_row_entropy") {
    CHECK(op_gradient_error(
              [](Tape& t, auto& x) { return t.mean_row_entropy(t.softmax_rows(x[0]), 1e-12); },
              {m(4, 5)}, 16) < tol);
  }
  SUBCASE("mutual_information_of_joint") {
    CHECK(op_gradient_error(
              [](Tape& t, auto& x) {
                Tensor p = t.softmax_rows(x[0]);
                return t.mutual_information_of_joint(t.scale(p, 1.0 / 3.0), 1e-12);
              },
              {m(3, 3)}, 17) < tol);
  }
}

TEST_CASE("rmsprop leaves parameters alone for a zero gradient") {
  Matrix theta = Matrix::from_rows({{1.0, -2.0}});
  Matrix v = Matrix::from_rows({{0.5, 0.25}});
  const RmspropConfig cfg{0.01, 0.9, 1e-8};
  rmsprop_update(theta, Matrix(1, 2, 0.0), v, cfg);
  CHECK(theta == Matrix::from_rows({{1.0, -2.0}}));
  CHECK(v(0, 0) == doctest::Approx(0.45).epsilon(1e-15));
  CHECK(v(0, 1) == doctest::Approx(0.225).epsilon(1e-15));
}

TEST_CASE("rmsprop first step by hand") {
  Matrix theta(1, 1, 0.0), v(1, 1, 0.0);
  rmsprop_update(theta, Matrix(1, 1, 1.0), v, {0.01, 0.9, 1e-8});
  CHECK(theta(0, 0) == doctest::Approx(-0.01 / (std::sqrt(0.1) + 1e-8)).epsilon(1e-14));
}

TEST_CASE("rmsprop repeated steps follow the scalar recurrence") {
  const RmspropConfig cfg{0.05, 0.99, 1e-8};
  Matrix theta(1, 1, 0.3), v(1, 1, 0.0);
  double t = 0.3, acc = 0.0;
  for (int step = 0; step < 2; ++step) {
    rmsprop_update(theta, Matrix(1, 1, 0.7), v, cfg);
    acc = 0.99 * acc + 0.01 * 0.49;
    t -= 0.05 * 0.7 / (std::sqrt(acc) + 1e-8);
  }
  CHECK(theta(0, 0) == doctest::Approx(t).epsilon(1e-14));
  CHECK(v(0, 0) == doctest::Approx(acc).epsilon(1e-14));
}

TEST_CASE("rmsprop optimizer keeps nonnegative accumulators and steps every parameter") {
  std::mt19937_64 rng(6);
  Tensor a = Tensor::parameter(random_matrix(3, 3, rng));
  Tensor b = Tensor::parameter(random_matrix(1, 3, rng));
  const Matrix a0 = a.value();
  Rmsprop opt({a, b}, {});
  for (int step = 0; step < 5; ++step) {
    opt.zero_grad();
    Tape tape;
    tape.backward(tape.sum_squares(tape.add_row(a, b)));
    opt.step();
    for (const auto& acc : opt.accumulators())
      for (double v : acc.data())
        CHECK(v >= 0.0);
  }
  CHECK(max_abs_diff(a.value(), a0) > 0.0);
}

TEST_CASE("rmsprop config validation names the field") {
  CHECK_THROWS_WITH_AS(RmspropConfig({-1.0, 0.99, 1e-8}).validate(),
                       doctest::Contains("learning_rate"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(RmspropConfig({1e-3, 1.0, 1e-8}).validate(), doctest::Contains("decay"),
                       std::invalid_argument);
}
