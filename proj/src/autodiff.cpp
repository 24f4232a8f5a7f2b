#include "dmac/autodiff.hpp"

#include <algorithm>
#include <cmath>

namespace dmac {

namespace {

using NodePtr = std::shared_ptr<TensorNode>;

void accumulate(TensorNode& node, Matrix g) {
  if (!node.requires_grad)
    return;
  if (node.grad.empty())
    node.grad = std::move(g);
  else
    node.grad += g;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.value().same_shape(b.value()))
    throw ShapeError(std::string(op) + ": " + a.value().shape() + " vs " + b.value().shape());
}

Matrix map(const Matrix& a, auto&& f) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i)
    out.data()[i] = f(a.data()[i]);
  return out;
}

Matrix scalar(double v) { return Matrix(1, 1, v); }

} // namespace

Tensor::Tensor(Matrix value, bool requires_grad)
    : node_(std::make_shared<TensorNode>(TensorNode{std::move(value), Matrix(), requires_grad})) {}

Matrix Tensor::grad() const {
  if (node_->grad.empty())
    return Matrix(rows(), cols());
  return node_->grad;
}

void Tensor::zero_grad() { node_->grad = Matrix(); }

double Tensor::item() const {
  if (rows() != 1 || cols() != 1)
    throw ContractError("item() on a " + value().shape() + " tensor");
  return value()(0, 0);
}

Tensor Tape::record(Matrix value, std::initializer_list<const Tensor*> inputs, BackwardFn fn) {
  const bool needs = std::any_of(inputs.begin(), inputs.end(),
                                 [](const Tensor* t) { return t->requires_grad(); });
  Tensor out(std::move(value), needs);
  if (needs)
    records_.push_back({out.node_, std::move(fn)});
  return out;
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
  NodePtr an = a.node_, bn = b.node_;
  return record(dmac::matmul(a.value(), b.value()), {&a, &b}, [an, bn](const TensorNode& out) {
    if (an->requires_grad)
      accumulate(*an, matmul_nt(out.grad, bn->value));
    if (bn->requires_grad)
      accumulate(*bn, matmul_tn(an->value, out.grad));
  });
}

Tensor Tape::transpose(const Tensor& a) {
  NodePtr an = a.node_;
  return record(dmac::transpose(a.value()), {&a},
                [an](const TensorNode& out) { accumulate(*an, dmac::transpose(out.grad)); });
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Matrix v = a.value();
  v += b.value();
  NodePtr an = a.node_, bn = b.node_;
  return record(std::move(v), {&a, &b}, [an, bn](const TensorNode& out) {
    accumulate(*an, out.grad);
    accumulate(*bn, out.grad);
  });
}

Tensor Tape::sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Matrix v = a.value();
  for (std::size_t i = 0; i < v.size(); ++i)
    v.data()[i] -= b.value().data()[i];
  NodePtr an = a.node_, bn = b.node_;
  return record(std::move(v), {&a, &b}, [an, bn](const TensorNode& out) {
    accumulate(*an, out.grad);
    if (bn->requires_grad)
      accumulate(*bn, map(out.grad, [](double g) { return -g; }));
  });
}

Tensor Tape::hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  Matrix v = a.value();
  for (std::size_t i = 0; i < v.size(); ++i)
    v.data()[i] *= b.value().data()[i];
  NodePtr an = a.node_, bn = b.node_;
  return record(std::move(v), {&a, &b}, [an, bn](const TensorNode& out) {
    if (an->requires_grad) {
      Matrix g = out.grad;
      for (std::size_t i = 0; i < g.size(); ++i)
        g.data()[i] *= bn->value.data()[i];
      accumulate(*an, std::move(g));
    }
    if (bn->requires_grad) {
      Matrix g = out.grad;
      for (std::size_t i = 0; i < g.size(); ++i)
        g.data()[i] *= an->value.data()[i];
      accumulate(*bn, std::move(g));
    }
  });
}

Tensor Tape::scale(const Tensor& a, double s) {
  NodePtr an = a.node_;
  return record(map(a.value(), [s](double x) { return s * x; }), {&a},
                [an, s](const TensorNode& out) {
                  accumulate(*an, map(out.grad, [s](double g) { return s * g; }));
                });
}

Tensor Tape::mean(std::span<const Tensor> xs) {
  if (xs.empty())
    throw ContractError("mean of zero tensors");
  for (const auto& x : xs)
    require_same_shape(xs.front(), x, "mean");
  const double count = static_cast<double>(xs.size());
  Matrix v(xs.front().rows(), xs.front().cols());
  std::vector<double> column(xs.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t a = 0; a < xs.size(); ++a)
      column[a] = xs[a].value().data()[i];
    std::sort(column.begin(), column.end());
    double s = 0.0;
    for (double c : column)
      s += c;
    v.data()[i] = s / count;
  }
  std::vector<NodePtr> nodes;
  bool needs = false;
  for (const auto& x : xs) {
    nodes.push_back(x.node_);
    needs = needs || x.requires_grad();
  }
  Tensor out(std::move(v), needs);
  if (needs)
    records_.push_back({out.node_, [nodes, count](const TensorNode& o) {
                          for (const auto& n : nodes)
                            accumulate(*n, map(o.grad, [count](double g) { return g / count; }));
                        }});
  return out;
}

Tensor Tape::add_row(const Tensor& a, const Tensor& bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols())
    throw ShapeError("add_row: bias " + bias.value().shape() + " for " + a.value().shape());
  Matrix v = a.value();
  for (std::size_t i = 0; i < v.rows(); ++i) {
    auto r = v.row(i);
    for (std::size_t j = 0; j < v.cols(); ++j)
      r[j] += bias.value()(0, j);
  }
  NodePtr an = a.node_, bn = bias.node_;
  return record(std::move(v), {&a, &bias}, [an, bn](const TensorNode& out) {
    accumulate(*an, out.grad);
    if (bn->requires_grad) {
      Matrix g(1, out.grad.cols());
      for (std::size_t i = 0; i < out.grad.rows(); ++i)
        for (std::size_t j = 0; j < out.grad.cols(); ++j)
          g(0, j) += out.grad(i, j);
      accumulate(*bn, std::move(g));
    }
  });
}

Tensor Tape::relu(const Tensor& a) {
  NodePtr an = a.node_;
  return record(map(a.value(), [](double x) { return x > 0.0 ? x : 0.0; }), {&a},
                [an](const TensorNode& out) {
                  Matrix g = out.grad;
                  for (std::size_t i = 0; i < g.size(); ++i)
                    if (!(an->value.data()[i] > 0.0))
                      g.data()[i] = 0.0;
                  accumulate(*an, std::move(g));
                });
}

Tensor Tape::tanh(const Tensor& a) {
  NodePtr an = a.node_;
  return record(map(a.value(), [](double x) { return std::tanh(x); }), {&a},
                [an](const TensorNode& out) {
                  Matrix g = out.grad;
                  for (std::size_t i = 0; i < g.size(); ++i) {
                    const double y = out.value.data()[i];
                    g.data()[i] *= 1.0 - y * y;
                  }
                  accumulate(*an, std::move(g));
                });
}

Tensor Tape::softplus(const Tensor& a) {
  NodePtr an = a.node_;
  auto f = [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); };
  return record(map(a.value(), f), {&a}, [an](const TensorNode& out) {
    Matrix g = out.grad;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = an->value.data()[i];
      const double sig = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
      g.data()[i] *= sig;
    }
    accumulate(*an, std::move(g));
  });
}

Tensor Tape::softmax_rows(const Tensor& a) {
  Matrix v = a.value();
  for (std::size_t i = 0; i < v.rows(); ++i) {
    auto r = v.row(i);
    const double mx = *std::max_element(r.begin(), r.end());
    double s = 0.0;
    for (double& x : r) {
      x = std::exp(x - mx);
      s += x;
    }
    for (double& x : r)
      x /= s;
  }
  NodePtr an = a.node_;
  return record(std::move(v), {&a}, [an](const TensorNode& out) {
    Matrix g(out.grad.rows(), out.grad.cols());
    for (std::size_t i = 0; i < g.rows(); ++i) {
      auto y = out.value.row(i);
      auto go = out.grad.row(i);
      double dot = 0.0;
      for (std::size_t j = 0; j < y.size(); ++j)
        dot += go[j] * y[j];
      for (std::size_t j = 0; j < y.size(); ++j)
        g(i, j) = y[j] * (go[j] - dot);
    }
    accumulate(*an, std::move(g));
  });
}

Tensor Tape::normalize_rows(const Tensor& a) {
  Matrix v = a.value();
  std::vector<double> sums(v.rows());
  for (std::size_t i = 0; i < v.rows(); ++i) {
    auto r = v.row(i);
    double s = 0.0;
    for (double x : r)
      s += x;
    if (!(s > 0.0))
      throw ContractError("normalize_rows: row " + std::to_string(i) + " has nonpositive sum");
    sums[i] = s;
    for (double& x : r)
      x /= s;
  }
  NodePtr an = a.node_;
  return record(std::move(v), {&a}, [an, sums = std::move(sums)](const TensorNode& out) {
    Matrix g(out.grad.rows(), out.grad.cols());
    for (std::size_t i = 0; i < g.rows(); ++i) {
      auto y = out.value.row(i);
      auto go = out.grad.row(i);
      double dot = 0.0;
      for (std::size_t j = 0; j < y.size(); ++j)
        dot += go[j] * y[j];
      for (std::size_t j = 0; j < y.size(); ++j)
        g(i, j) = (go[j] - dot) / sums[i];
    }
    accumulate(*an, std::move(g));
  });
}

Tensor Tape::sum(const Tensor& a) {
  double s = 0.0;
  for (double x : a.value().data())
    s += x;
  NodePtr an = a.node_;
  return record(scalar(s), {&a}, [an](const TensorNode& out) {
    accumulate(*an, Matrix(an->value.rows(), an->value.cols(), out.grad(0, 0)));
  });
}

Tensor Tape::sum_squares(const Tensor& a) {
  NodePtr an = a.node_;
  return record(scalar(frobenius_sq(a.value())), {&a}, [an](const TensorNode& out) {
    const double g = 2.0 * out.grad(0, 0);
    accumulate(*an, map(an->value, [g](double x) { return g * x; }));
  });
}

Tensor Tape::sparse_matmul(const SparseMatrix& s, const Tensor& x) {
  NodePtr xn = x.node_;
  return record(s.multiply(x.value()), {&x}, [xn, s](const TensorNode& out) {
    accumulate(*xn, s.transpose_multiply(out.grad));
  });
}

Tensor Tape::squared_distances(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols())
    throw ShapeError("squared_distances: " + a.value().shape() + " vs " + b.value().shape());
  Matrix v(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j)
      v(i, j) = squared_distance(a.value().row(i), b.value().row(j));
  NodePtr an = a.node_, bn = b.node_;
  return record(std::move(v), {&a, &b}, [an, bn](const TensorNode& out) {
    const Matrix& g = out.grad;
    if (an->requires_grad) {
      Matrix da = dmac::matmul(g, bn->value);
      for (std::size_t i = 0; i < da.rows(); ++i) {
        double rs = 0.0;
        for (double x : g.row(i))
          rs += x;
        auto r = da.row(i);
        auto ar = an->value.row(i);
        for (std::size_t k = 0; k < r.size(); ++k)
          r[k] = 2.0 * (rs * ar[k] - r[k]);
      }
      accumulate(*an, std::move(da));
    }
    if (bn->requires_grad) {
      Matrix db = matmul_tn(g, an->value);
      std::vector<double> cs(g.cols(), 0.0);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j)
          cs[j] += g(i, j);
      for (std::size_t j = 0; j < db.rows(); ++j) {
        auto r = db.row(j);
        auto br = bn->value.row(j);
        for (std::size_t k = 0; k < r.size(); ++k)
          r[k] = 2.0 * (cs[j] * br[k] - r[k]);
      }
      accumulate(*bn, std::move(db));
    }
  });
}

Tensor Tape::student_t_kernel(const Tensor& a) {
  NodePtr an = a.node_;
  return record(map(a.value(), [](double x) { return 1.0 / (1.0 + x); }), {&a},
                [an](const TensorNode& out) {
                  Matrix g = out.grad;
                  for (std::size_t i = 0; i < g.size(); ++i) {
                    const double y = out.value.data()[i];
                    g.data()[i] *= -y * y;
                  }
                  accumulate(*an, std::move(g));
                });
}

Tensor Tape::mean_row_entropy(const Tensor& q, double floor) {
  const double n = static_cast<double>(q.rows());
  double h = 0.0;
  for (double x : q.value().data())
    h -= x * std::log(std::max(x, floor));
  NodePtr qn = q.node_;
  return record(scalar(h / n), {&q}, [qn, floor, n](const TensorNode& out) {
    const double g = out.grad(0, 0);
    accumulate(*qn, map(qn->value, [&](double x) {
                 const double d = std::log(std::max(x, floor)) + (x > floor ? 1.0 : 0.0);
                 return -g * d / n;
               }));
  });
}

Tensor Tape::mutual_information_of_joint(const Tensor& p, double floor) {
  const Matrix& pv = p.value();
  std::vector<double> px(pv.rows(), 0.0), py(pv.cols(), 0.0);
  for (std::size_t x = 0; x < pv.rows(); ++x)
    for (std::size_t y = 0; y < pv.cols(); ++y) {
      px[x] += pv(x, y);
      py[y] += pv(x, y);
    }
  auto clog = [floor](double v) { return std::log(std::max(v, floor)); };
  double mi = 0.0;
  for (std::size_t x = 0; x < pv.rows(); ++x)
    for (std::size_t y = 0; y < pv.cols(); ++y)
      mi += pv(x, y) * (clog(pv(x, y)) - clog(px[x]) - clog(py[y]));
  NodePtr pn = p.node_;
  return record(scalar(mi), {&p},
                [pn, px = std::move(px), py = std::move(py), floor, clog](const TensorNode& out) {
                  const double g = out.grad(0, 0);
                  const Matrix& v = pn->value;
                  Matrix d(v.rows(), v.cols());
                  for (std::size_t x = 0; x < v.rows(); ++x)
                    for (std::size_t y = 0; y < v.cols(); ++y) {
                      double t = clog(v(x, y)) - clog(px[x]) - clog(py[y]);
                      t += (v(x, y) > floor ? 1.0 : 0.0) - (px[x] > floor ? 1.0 : 0.0) -
                           (py[y] > floor ? 1.0 : 0.0);
                      d(x, y) = g * t;
                    }
                  accumulate(*pn, std::move(d));
                });
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.rows() != 1 || loss.cols() != 1)
    throw ContractError("backward requires a 1x1 loss, got " +
                        (loss.defined() ? loss.value().shape() : std::string("undefined")));
  if (!loss.requires_grad()) {
    records_.clear();
    return;
  }
  accumulate(*loss.node_, Matrix(1, 1, 1.0));
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    if (it->output->grad.empty())
      continue;
    it->backward(*it->output);
  }
  records_.clear();
}

} // namespace dmac
