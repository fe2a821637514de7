#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace admmnn {

using Vector = std::vector<double>;

/// Thrown when operand shapes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown by direct factorizations when a pivot collapses.
class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense real matrix, row-major storage.
///
/// Data matrices follow the column-per-sample convention: a D x N matrix
/// holds N samples of dimension D.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  Vector column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const double> values);

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  /// Copy of the given columns, in order.
  DenseMatrix select_columns(std::span<const std::size_t> indices) const;

  std::string shape_string() const;

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// a^T * b without forming the transpose.
DenseMatrix matmul_transposed_left(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);
Vector matvec(const DenseMatrix& a, std::span<const double> x);
/// a^T * x
Vector matvec_transposed(const DenseMatrix& a, std::span<const double> x);

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double s, const DenseMatrix& a);

DenseMatrix map(const DenseMatrix& a, const std::function<double(double)>& f);

double frobenius_norm(const DenseMatrix& a);
/// Sum of element-wise products.
double frobenius_dot(const DenseMatrix& a, const DenseMatrix& b);
bool all_finite(const DenseMatrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

/// Cholesky factorization L L^T of a symmetric positive definite matrix.
class CholeskyFactor {
 public:
  /// Throws SingularMatrixError when a pivot is not safely positive.
  explicit CholeskyFactor(const DenseMatrix& spd);

  std::size_t dim() const noexcept { return lower_.rows(); }
  Vector solve(std::span<const double> rhs) const;

 private:
  DenseMatrix lower_;
};

/// Least-squares solution of a x = b through the normal equations
/// a^T a x = a^T b, factored by Cholesky.
Vector solve_least_squares_direct(const DenseMatrix& a, std::span<const double> b);

/// Same as solve_least_squares_direct for several right-hand sides, sharing
/// one factorization.
std::vector<Vector> solve_least_squares_direct_multi(const DenseMatrix& a,
                                                     std::span<const Vector> rhs);

}  // namespace admmnn
