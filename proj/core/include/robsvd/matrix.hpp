#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace robsvd {

/// Tolerances shared by every module that orthonormalizes or reconstructs.
inline constexpr double kRankTolerance = 1e-12;
inline constexpr double kReconstructionTolerance = 1e-10;

/// Dense real matrix stored row-major.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Takes ownership of `row_major`; throws InvalidArgument on size mismatch
  /// or non-finite entries.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);
  /// A single column built from `values`.
  static Matrix column_vector(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  std::vector<double> column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const double> values);

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  Matrix transposed() const;
  bool all_finite() const noexcept;

  /// Throws InvalidArgument naming `what` when an entry is NaN or infinite.
  void require_finite(const char* what) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Diagonal of a square matrix (weight matrices, covariance diagonals, Λ).
class DiagonalMatrix {
 public:
  DiagonalMatrix() = default;
  explicit DiagonalMatrix(std::vector<double> diag) : diag_(std::move(diag)) {}

  std::size_t size() const noexcept { return diag_.size(); }
  double operator[](std::size_t i) const noexcept { return diag_[i]; }
  const std::vector<double>& values() const noexcept { return diag_; }
  bool nonnegative() const noexcept;
  Matrix to_dense() const;

 private:
  std::vector<double> diag_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

/// a * b' without forming the transpose.
Matrix multiply_transposed(const Matrix& a, const Matrix& b);
/// a' * b without forming the transpose.
Matrix transposed_multiply(const Matrix& a, const Matrix& b);

double max_abs(const Matrix& a) noexcept;
double frobenius_norm(const Matrix& a) noexcept;
double dot(std::span<const double> a, std::span<const double> b) noexcept;
double norm2(std::span<const double> a) noexcept;

/// Inverse of a small square matrix by Gauss-Jordan with partial pivoting.
/// Throws SingularNormalMatrix when the 1-norm condition number exceeds
/// `max_condition` or a pivot vanishes.
Matrix inverse(const Matrix& a, double max_condition = 1e12);

/// 1-norm condition number ‖a‖₁‖a⁻¹‖₁; infinity when singular.
double condition_number(const Matrix& a);

/// Gram-Schmidt orthonormal basis of the columns of `m` (m.rows() >= m.cols()).
/// Modified Gram-Schmidt with one reorthogonalization pass; the first nonzero
/// component of every output column is positive. Throws RankDeficient.
Matrix orthonormalize(const Matrix& m);

struct SvdResult {
  Matrix u;                     // m x k, orthonormal columns
  DiagonalMatrix singular_values;  // k values, descending
  Matrix v;                     // n x k, orthonormal columns
};

/// Thin SVD (k = min(m, n)) by one-sided Jacobi rotations. Singular values are
/// sorted descending; each U column has its first nonzero component positive.
/// Throws NoConvergence after 60 sweeps.
SvdResult classical_svd(const Matrix& m);

/// U * diag(lambda) * V'.
Matrix reconstruct(const SvdResult& svd);

/// Best rank-`rank` approximation from the leading singular triplets.
Matrix truncate(const SvdResult& svd, std::size_t rank);

}  // namespace robsvd
