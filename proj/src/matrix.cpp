#include "dmac/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace dmac {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols)
    throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                     " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c)
      throw ShapeError("ragged rows in matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    m(i, i) = 1.0;
  return m;
}

std::string Matrix::shape() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix& Matrix::operator+=(const Matrix& o) {
  if (!same_shape(o))
    throw ShapeError("cannot add " + o.shape() + " to " + shape());
  for (std::size_t i = 0; i < data_.size(); ++i)
    data_[i] += o.data_[i];
  return *this;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: " + a.shape() + " * " + b.shape());
  Matrix out(a.rows(), b.cols());
  const std::size_t inner = a.cols();
  const std::size_t m = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* o = out.row(i).data();
    const double* ar = a.row(i).data();
    for (std::size_t k = 0; k < inner; ++k) {
      const double s = ar[k];
      if (s == 0.0)
        continue;
      const double* br = b.row(k).data();
      for (std::size_t j = 0; j < m; ++j)
        o[j] += s * br[j];
    }
  }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows())
    throw ShapeError("matmul_tn: " + a.shape() + "^T * " + b.shape());
  Matrix out(a.cols(), b.cols());
  const std::size_t m = b.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* ar = a.row(k).data();
    const double* br = b.row(k).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double s = ar[i];
      if (s == 0.0)
        continue;
      double* o = out.row(i).data();
      for (std::size_t j = 0; j < m; ++j)
        o[j] += s * br[j];
    }
  }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols())
    throw ShapeError("matmul_nt: " + a.shape() + " * " + b.shape() + "^T");
  Matrix out(a.rows(), b.rows());
  const std::size_t inner = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ar = a.row(i).data();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* br = b.row(j).data();
      double s = 0.0;
      for (std::size_t k = 0; k < inner; ++k)
        s += ar[k] * br[k];
      out(i, j) = s;
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      out(j, i) = a(i, j);
  return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b))
    throw ShapeError("max_abs_diff: " + a.shape() + " vs " + b.shape());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

double frobenius_sq(const Matrix& a) {
  double s = 0.0;
  for (double x : a.data())
    s += x * x;
  return s;
}

bool all_finite(const Matrix& a) {
  return std::all_of(a.data().begin(), a.data().end(), [](double x) { return std::isfinite(x); });
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                           std::vector<std::size_t> col_idx, std::vector<double> values)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (row_ptr_.size() != rows_ + 1 || col_idx_.size() != values_.size() ||
      row_ptr_.back() != values_.size())
    throw ShapeError("inconsistent CSR arrays");
  for (auto c : col_idx_)
    if (c >= cols_)
      throw ShapeError("CSR column index out of range");
}

SparseMatrix SparseMatrix::from_dense(const Matrix& dense) {
  std::vector<std::size_t> ptr{0};
  std::vector<std::size_t> idx;
  std::vector<double> val;
  for (std::size_t i = 0; i < dense.rows(); ++i) {
    for (std::size_t j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) {
        idx.push_back(j);
        val.push_back(dense(i, j));
      }
    }
    ptr.push_back(idx.size());
  }
  return SparseMatrix(dense.rows(), dense.cols(), std::move(ptr), std::move(idx), std::move(val));
}

Matrix SparseMatrix::multiply(const Matrix& x) const {
  if (x.rows() != cols_)
    throw ShapeError("sparse multiply: " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                     " * " + x.shape());
  Matrix out(rows_, x.cols());
  for (std::size_t i = 0; i < rows_; ++i) {
    double* o = out.row(i).data();
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      const double s = values_[p];
      const double* xr = x.row(col_idx_[p]).data();
      for (std::size_t j = 0; j < x.cols(); ++j)
        o[j] += s * xr[j];
    }
  }
  return out;
}

Matrix SparseMatrix::transpose_multiply(const Matrix& x) const {
  if (x.rows() != rows_)
    throw ShapeError("sparse transpose multiply: (" + std::to_string(rows_) + "x" +
                     std::to_string(cols_) + ")^T * " + x.shape());
  Matrix out(cols_, x.cols());
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* xr = x.row(i).data();
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      const double s = values_[p];
      double* o = out.row(col_idx_[p]).data();
      for (std::size_t j = 0; j < x.cols(); ++j)
        o[j] += s * xr[j];
    }
  }
  return out;
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<std::size_t> ptr(cols_ + 1, 0);
  for (auto c : col_idx_)
    ++ptr[c + 1];
  for (std::size_t j = 0; j < cols_; ++j)
    ptr[j + 1] += ptr[j];
  std::vector<std::size_t> idx(values_.size());
  std::vector<double> val(values_.size());
  std::vector<std::size_t> cursor(ptr.begin(), ptr.end() - 1);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      const std::size_t dst = cursor[col_idx_[p]]++;
      idx[dst] = i;
      val[dst] = values_[p];
    }
  }
  return SparseMatrix(cols_, rows_, std::move(ptr), std::move(idx), std::move(val));
}

Matrix SparseMatrix::to_dense() const {
  Matrix out(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
      out(i, col_idx_[p]) += values_[p];
  return out;
}

} // namespace dmac
