#pragma once

#include <cstdint>
#include <vector>

#include "robsvd/error.hpp"
#include "robsvd/matrix.hpp"
#include "robsvd/weights.hpp"

namespace robsvd {

/// {0, 1/(steps-1), ..., 1}.
std::vector<double> default_continuation(int steps = 11);

struct TsvdConfig {
  std::size_t rank = 1;
  WeightSpec spec;  // least squares by default
  bool total = false;
  std::vector<double> continuation = default_continuation();
  double tol = 1e-8;
  int max_outer = 200;
  /// How many times a continuation step may be halved before giving up.
  int max_halvings = 6;
  std::uint64_t seed = 42;

  /// Throws InvalidArgument on a bad rank or schedule.
  void validate(std::size_t m, std::size_t n) const;
};

struct TsvdState {
  Matrix A;      // m x p, orthonormal columns
  Matrix B;      // n x p
  Matrix var_A;  // m x p entry variances
  Matrix var_B;  // n x p entry variances
  Matrix W;      // m x n entry weights
  double s = 0.0;
  double nu = 0.0;
};

struct TsvdResult {
  TsvdState state;
  Matrix approximation;  // A B'
  DiagonalMatrix singular_values;
  Matrix U;
  Matrix V;
  int outer_iterations = 0;
  bool converged = false;
  /// Continuation values actually visited (after any step halving).
  std::vector<double> stages;
};

/// A continuation stage ran out of outer iterations even after halving.
class ContinuationStallError : public Error {
 public:
  ContinuationStallError(double t, double last_good_t, TsvdState last_good, const std::string& what)
      : Error(ErrorCode::ContinuationStall, what),
        t_(t),
        last_good_t_(last_good_t),
        last_good_(std::move(last_good)) {}
  double t() const noexcept { return t_; }
  double last_good_t() const noexcept { return last_good_t_; }
  const TsvdState& last_good() const noexcept { return last_good_; }

 private:
  double t_;
  double last_good_t_;
  TsvdState last_good_;
};

struct BaselineResult {
  Matrix A;  // orthonormal
  Matrix B;
  int iterations = 0;
  /// Frobenius residual after every half-step.
  std::vector<double> residuals;
};

/// Unweighted alternating least squares from a seeded random orthonormal start.
/// Throws MaxIterError<BaselineResult>.
BaselineResult baseline_alternating_svd(const Matrix& X, std::size_t p, double tol = 1e-10,
                                        std::uint64_t seed = 42, int max_iter = 100000);

struct WeightEvaluation {
  Matrix W;
  double s = 0.0;
  double n_eff = 0.0;
  double nu = 0.0;
};

/// nu = (m + n - (p + 1)/2) p, the parameter count of a rank-p factorization.
double degrees_of_freedom(std::size_t m, std::size_t n, std::size_t p);

/// Entry weights from the residuals of X - A B' and their joint scale.
/// `entry_variance` (m x n, optional) adds per-entry factor uncertainty to the
/// scale equation only. `s_init <= 0` starts from the unweighted scale.
/// Throws DoFExhausted when N <= nu.
WeightEvaluation evaluate_weights(const Matrix& X, const Matrix& A, const Matrix& B,
                                  const WeightSpec& spec, double s_init,
                                  const Matrix* entry_variance = nullptr);

struct FactorStep {
  Matrix factor;      // estimated factor (orthonormalized for the A-step)
  Matrix raw;         // factor before orthonormalization
  Matrix variances;   // entry variances, zero when not total
  std::vector<double> scales;  // per column (B-step) or per row (A-step)
};

/// Column-by-column weighted solves for B given A. `t` scales the A
/// variances; with `total` false the variances are ignored and returned as 0.
/// Throws IndexedError(SingularColumnSystem, j).
FactorStep estimate_B_step(const Matrix& X, const Matrix& A, const Matrix& var_A, const Matrix& W,
                           const WeightSpec& spec, double t = 1.0, bool total = true);

/// Row-by-row mirror of estimate_B_step, followed by orthonormalization.
/// Throws IndexedError(SingularRowSystem, i), RankDeficient.
FactorStep estimate_A_step(const Matrix& X, const Matrix& B, const Matrix& var_B, const Matrix& W,
                           const WeightSpec& spec, double t = 1.0, bool total = true);

/// Robust (or total) rank-p approximation of X.
TsvdResult total_svd(const Matrix& X, const TsvdConfig& cfg);

/// Thin SVD of A B' restricted to the leading p = A.cols() triplets.
SvdResult singular_values_of(const Matrix& A, const Matrix& B);

/// Sum over entries of (x_ij - a_i'b_j)^2 + a_i' DiaCov(b_j) a_i + b_j' DiaCov(a_i) b_j.
double total_objective(const Matrix& X, const Matrix& A, const Matrix& B, const Matrix& var_A,
                       const Matrix& var_B);

/// Weights of a separate robust regression of every column of X on A (m x n).
Matrix column_regression_weights(const Matrix& X, const Matrix& A, const WeightSpec& spec);
/// Weights of a separate robust regression of every row of X on B (m x n).
Matrix row_regression_weights(const Matrix& X, const Matrix& B, const WeightSpec& spec);

}  // namespace robsvd
