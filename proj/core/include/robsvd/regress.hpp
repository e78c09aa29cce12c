#pragma once

#include <span>
#include <vector>

#include "robsvd/matrix.hpp"
#include "robsvd/weights.hpp"

namespace robsvd {

/// y = D beta + error, with per-row design covariances S_i = diag(S.row(i)).
struct RegressionProblem {
  std::vector<double> y;
  Matrix D;
  /// n x p; row i holds the diagonal of S_i. Empty means all S_i = 0.
  Matrix S;

  /// Throws InvalidArgument on inconsistent shapes, n < p or negative variances.
  void validate() const;
};

struct RegressionEstimate {
  std::vector<double> beta;
  double s = 0.0;  // weighted residual scale, no k2 factor
  std::vector<double> weights;
  Matrix cov_beta;  // empty when N_eff <= p
  double n_eff = 0.0;  // (sum w^2)^2 / sum w^4
  bool converged = false;
  int iterations = 0;
};

struct RegressOptions {
  double tol = 1e-10;
  int max_iter = 500;
  bool accelerate = true;
};

/// One weighted generalised least-squares solve with fixed squared weights w2:
/// J = sum w2_i (d_i d_i' + t S_i), beta = J^-1 D' diag(w2) y.
struct WeightedSolve {
  std::vector<double> beta;
  Matrix j;
  Matrix j_inv;
  std::vector<double> residuals;
  double s2 = 0.0;     // sum w2 r^2 / sum w2
  double n_eff = 0.0;  // (sum w2)^2 / sum w2^2
};

/// `S` may be empty; `t` scales every S_i. Throws SingularNormalMatrix.
WeightedSolve weighted_solve(std::span<const double> y, const Matrix& D, const Matrix& S,
                             double t, std::span<const double> w2);

/// k2^2 N/(N-p) J^-1 {sum w2^2 [s^2 d d' + (t S_i beta)(t S_i beta)']} J^-1, symmetrised.
/// Throws DegenerateDoF when N <= p.
Matrix weighted_covariance(const WeightedSolve& solve, const Matrix& D, const Matrix& S,
                           double t, std::span<const double> w2, double k2);

/// Robust generalised least squares, started from the unweighted GLS fit.
/// Weights use u_i = r_i / (k3 s). Throws SingularNormalMatrix,
/// MaxIterError<RegressionEstimate>.
RegressionEstimate robust_gls(const RegressionProblem& prob, const WeightSpec& spec,
                              const RegressOptions& options = {});
RegressionEstimate robust_gls(const RegressionProblem& prob, const WeightSpec& spec, double tol,
                              int max_iter);

/// Stabilised covariance of beta; k2 from `spec` (1 in the least-squares limit).
Matrix covariance(const RegressionEstimate& est, const RegressionProblem& prob,
                  const WeightSpec& spec);

/// Diagnostic sandwich variant built from (e_i d_i - S_i beta).
Matrix sandwich_covariance(const RegressionEstimate& est, const RegressionProblem& prob,
                           const WeightSpec& spec);

}  // namespace robsvd
