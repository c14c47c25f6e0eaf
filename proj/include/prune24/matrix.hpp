#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace prune24 {

/// Dense row-major matrix of doubles. Rows are layer outputs, columns inputs.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  const std::vector<double>& values() const { return data_; }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Layerwise Hessian H = X X^T / n. Symmetric, expected PSD.
class Hessian {
 public:
  Hessian() = default;
  /// Throws std::invalid_argument if `m` is not square or not symmetric to 1e-12 relative.
  explicit Hessian(Matrix m);

  std::size_t dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  std::span<const double> row(std::size_t i) const { return m_.row(i); }

  std::optional<double> gamma_max() const { return gamma_max_; }
  void set_gamma_max(double g) { gamma_max_ = g; }

 private:
  Matrix m_;
  std::optional<double> gamma_max_;
};

/// Per-column scales H_jj^{1/2} used by the WandA-style preconditioning.
struct PrecondState {
  std::vector<double> diag_scales;
};

}  // namespace prune24
