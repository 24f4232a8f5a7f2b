#pragma once

#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "dmac/matrix.hpp"

namespace dmac {

/// Raised when an API precondition is violated (e.g. backward on a non-scalar).
class ContractError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

struct TensorNode {
  Matrix value;
  Matrix grad; // empty until something flows into it
  bool requires_grad = false;
};

/// Shared handle to a value participating in reverse-mode differentiation.
/// Copies alias the same node, so a parameter held by a model and by the
/// optimizer is one buffer.
class Tensor {
public:
  Tensor() = default;
  explicit Tensor(Matrix value, bool requires_grad = false);

  static Tensor parameter(Matrix value) { return Tensor(std::move(value), true); }

  bool defined() const { return node_ != nullptr; }
  std::size_t rows() const { return node_->value.rows(); }
  std::size_t cols() const { return node_->value.cols(); }
  bool requires_grad() const { return node_->requires_grad; }

  const Matrix& value() const { return node_->value; }
  /// Direct write access for optimizers and finite-difference probes.
  Matrix& mutable_value() { return node_->value; }

  bool has_grad() const { return !node_->grad.empty(); }
  /// Gradient buffer; a zero matrix of the value's shape if nothing flowed in.
  Matrix grad() const;
  void zero_grad();

  /// Scalar value of a 1x1 tensor.
  double item() const;

  bool same_node(const Tensor& o) const { return node_ == o.node_; }

private:
  friend class Tape;
  std::shared_ptr<TensorNode> node_;
};

/// Ordered record of executed operations. Every op evaluates eagerly and, if
/// any input requires a gradient, appends a node with its backward rule.
/// backward() replays the record in reverse and then clears it.
class Tape {
public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  std::size_t size() const { return records_.size(); }
  void clear() { records_.clear(); }

  Tensor constant(Matrix value) const { return Tensor(std::move(value), false); }

  Tensor matmul(const Tensor& a, const Tensor& b);
  Tensor transpose(const Tensor& a);
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor sub(const Tensor& a, const Tensor& b);
  Tensor hadamard(const Tensor& a, const Tensor& b);
  Tensor scale(const Tensor& a, double s);
  /// Elementwise mean of equally shaped tensors. Each element is summed in
  /// sorted order, so the result does not depend on the input order.
  Tensor mean(std::span<const Tensor> xs);
  /// a + 1·bias, bias is 1×cols.
  Tensor add_row(const Tensor& a, const Tensor& bias);

  Tensor relu(const Tensor& a);
  Tensor tanh(const Tensor& a);
  Tensor softplus(const Tensor& a);
  /// Row-wise softmax, stabilized by subtracting the row maximum.
  Tensor softmax_rows(const Tensor& a);
  /// Divides each row by its sum. Rows must have positive sums.
  Tensor normalize_rows(const Tensor& a);

  Tensor sum(const Tensor& a);
  Tensor sum_squares(const Tensor& a);

  /// s · x for a constant sparse s.
  Tensor sparse_matmul(const SparseMatrix& s, const Tensor& x);

  /// d_ij = ‖a_i − b_j‖².
  Tensor squared_distances(const Tensor& a, const Tensor& b);
  /// Elementwise (1 + x)⁻¹.
  Tensor student_t_kernel(const Tensor& a);

  /// −(1/rows) Σ_ij q_ij log max(q_ij, floor).
  Tensor mean_row_entropy(const Tensor& q, double floor);

  /// Mutual information of a joint distribution p (nonnegative, sums to 1):
  /// Σ p_xy [log max(p_xy,f) − log max(p_x,f) − log max(p_y,f)] with p_x, p_y
  /// the row and column sums.
  Tensor mutual_information_of_joint(const Tensor& p, double floor);

  void backward(const Tensor& loss);

private:
  using BackwardFn = std::function<void(const TensorNode& out)>;
  struct Record {
    std::shared_ptr<TensorNode> output;
    BackwardFn backward;
  };

  Tensor record(Matrix value, std::initializer_list<const Tensor*> inputs, BackwardFn fn);

  std::vector<Record> records_;
};

} // namespace dmac
