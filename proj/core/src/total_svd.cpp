#include "robsvd/total_svd.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "robsvd/regress.hpp"

namespace robsvd {

std::vector<double> default_continuation(int steps) {
  if (steps < 2) return {0.0, 1.0};
  std::vector<double> t(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) t[static_cast<std::size_t>(i)] = static_cast<double>(i) / (steps - 1);
  return t;
}

void TsvdConfig::validate(std::size_t m, std::size_t n) const {
  if (rank == 0 || rank > std::min(m, n)) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("tsvd: rank {} must lie in [1, {}]", rank, std::min(m, n)));
  }
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tsvd: tol must be > 0");
  if (max_outer < 1) throw Error(ErrorCode::InvalidArgument, "tsvd: max_outer must be >= 1");
  if (total) {
    if (continuation.size() < 2 || continuation.front() != 0.0 || continuation.back() != 1.0) {
      throw Error(ErrorCode::InvalidArgument, "tsvd: continuation must run from 0 to 1");
    }
    for (std::size_t i = 1; i < continuation.size(); ++i)
      if (!(continuation[i] > continuation[i - 1])) {
        throw Error(ErrorCode::InvalidArgument, "tsvd: continuation must be strictly increasing");
      }
  }
}

double degrees_of_freedom(std::size_t m, std::size_t n, std::size_t p) {
  return (static_cast<double>(m + n) - 0.5 * static_cast<double>(p + 1)) * static_cast<double>(p);
}

BaselineResult baseline_alternating_svd(const Matrix& X, std::size_t p, double tol,
                                        std::uint64_t seed, int max_iter) {
  X.require_finite("baseline_alternating_svd");
  const std::size_t m = X.rows(), n = X.cols();
  if (p == 0 || p > std::min(m, n)) {
    throw Error(ErrorCode::InvalidArgument, "baseline_alternating_svd: rank out of range");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Matrix start(m, p);
  for (double& v : start.data()) v = gauss(rng);

  BaselineResult out;
  out.A = orthonormalize(start);
  out.B = transposed_multiply(X, out.A);  // n x p
  out.residuals.push_back(frobenius_norm(X - multiply_transposed(out.A, out.B)));
  Matrix prev = multiply_transposed(out.A, out.B);

  for (int it = 1; it <= max_iter; ++it) {
    // A-step: least squares A given B, then orthonormalize
    Matrix gram_inv = inverse(transposed_multiply(out.B, out.B));
    Matrix a_raw = X * out.B * gram_inv;
    out.residuals.push_back(frobenius_norm(X - multiply_transposed(a_raw, out.B)));
    out.A = orthonormalize(a_raw);
    // B-step: with orthonormal A the least-squares B is X'A
    out.B = transposed_multiply(X, out.A);
    Matrix cur = multiply_transposed(out.A, out.B);
    out.residuals.push_back(frobenius_norm(X - cur));
    out.iterations = it;
    double norm = frobenius_norm(cur);
    if (norm == 0.0 || frobenius_norm(cur - prev) < tol * norm) return out;
    prev = std::move(cur);
  }
  throw MaxIterError<BaselineResult>(
      out, fmt::format("baseline_alternating_svd: no convergence after {} iterations", max_iter));
}

WeightEvaluation evaluate_weights(const Matrix& X, const Matrix& A, const Matrix& B,
                                  const WeightSpec& spec, double s_init,
                                  const Matrix* entry_variance) {
  const std::size_t m = X.rows(), n = X.cols(), p = A.cols();
  Matrix f = X - multiply_transposed(A, B);
  WeightEvaluation ev;
  ev.nu = degrees_of_freedom(m, n, p);
  const double total = static_cast<double>(m * n);
  if (!(total > ev.nu)) {
    throw Error(ErrorCode::DoFExhausted,
                fmt::format("evaluate_weights: {} entries do not exceed nu = {}", m * n, ev.nu));
  }
  auto extra = [&](std::size_t k) {
    return entry_variance == nullptr ? 0.0 : entry_variance->data()[k];
  };
  auto fd = f.data();
  ev.W = Matrix(m, n, 1.0);

  double sq = 0.0, sq_extra = 0.0, f_max = 0.0;
  for (std::size_t k = 0; k < fd.size(); ++k) {
    sq += fd[k] * fd[k];
    sq_extra += fd[k] * fd[k] + extra(k);
    f_max = std::max(f_max, std::abs(fd[k]) + std::sqrt(extra(k)));
  }
  // residuals at rounding level count as an exact fit
  if (f_max <= 1e-12 * max_abs(X)) {
    ev.s = 0.0;
    ev.n_eff = total;
    return ev;
  }
  if (!spec.robust()) {
    ev.n_eff = total;
    ev.s = std::sqrt(total / (total - ev.nu) * sq_extra / total);
    return ev;
  }

  // the s-equation: s^2 = N/(N - nu) sum w^2 (f^2 + v) / sum w^2, w = w(f / (k3 s))
  auto update = [&](double s, double* n_out) {
    double sw = 0.0, sw2 = 0.0, swf = 0.0;
    for (std::size_t k = 0; k < fd.size(); ++k) {
      double w = weight(fd[k] / (spec.k3() * s), spec.q());
      sw += w;
      sw2 += w * w;
      swf += w * w * (fd[k] * fd[k] + extra(k));
    }
    double big_n = sw * sw / sw2;
    if (n_out) *n_out = big_n;
    if (!(big_n > ev.nu)) {
      throw Error(ErrorCode::DoFExhausted,
                  fmt::format("evaluate_weights: effective size {:.4g} <= nu = {}", big_n, ev.nu));
    }
    return std::sqrt(big_n / (big_n - ev.nu) * swf / sw2);
  };

  double s = s_init > 0.0 ? s_init : std::sqrt(sq / (total - ev.nu));
  bool converged = false;
  double history[3];
  int filled = 0;
  history[filled++] = s;
  for (int it = 0; it < 2000; ++it) {
    double next = update(s, nullptr);
    bool done = std::abs(next - s) < 1e-12 * next;
    s = next;
    if (done) {
      converged = true;
      break;
    }
    history[filled++] = s;
    if (filled == 3) {
      double d1 = history[1] - history[0], d2 = history[2] - history[1];
      double den = d2 - d1;
      if (den != 0.0 && std::abs(d2) < std::abs(d1)) {
        double cand = history[2] - d2 * d2 / den;
        if (std::isfinite(cand) && cand > 0.0 && std::abs(cand - s) <= 100.0 * std::abs(d2)) s = cand;
      }
      filled = 0;
      history[filled++] = s;
    }
  }
  if (!converged) {
    throw Error(ErrorCode::MaxIterExceeded, "evaluate_weights: scale iteration did not converge");
  }
  update(s, &ev.n_eff);
  ev.s = s;
  for (std::size_t k = 0; k < fd.size(); ++k) ev.W.data()[k] = weight(fd[k] / (spec.k3() * s), spec.q());
  return ev;
}

namespace {

// Shared kernel of the two factor steps: regress every column of Y (rows x
// cols) on the design D with squared weights from the matching column of W.
FactorStep factor_step(const Matrix& Y, const Matrix& D, const Matrix& var_D, const Matrix& W,
                       const WeightSpec& spec, double t, bool total, ErrorCode singular) {
  const std::size_t rows = Y.rows(), cols = Y.cols(), p = D.cols();
  FactorStep out;
  out.factor = Matrix(cols, p);
  out.variances = Matrix(cols, p);
  out.scales.resize(cols);
  const Matrix empty;
  const Matrix& S = total ? var_D : empty;
  std::vector<double> y(rows), w2(rows);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < rows; ++i) {
      y[i] = Y(i, j);
      w2[i] = W(i, j) * W(i, j);
    }
    WeightedSolve sol;
    try {
      sol = weighted_solve(y, D, S, t, w2);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularNormalMatrix) throw;
      throw IndexedError(singular, j, fmt::format("{} at index {}: {}", to_string(singular), j, e.what()));
    }
    for (std::size_t k = 0; k < p; ++k) out.factor(j, k) = sol.beta[k];
    out.scales[j] = std::sqrt(sol.s2);
    if (total) {
      Matrix cov = weighted_covariance(sol, D, S, t, w2, spec.k2());
      for (std::size_t k = 0; k < p; ++k) out.variances(j, k) = std::max(0.0, cov(k, k));
    }
  }
  return out;
}

}  // namespace

FactorStep estimate_B_step(const Matrix& X, const Matrix& A, const Matrix& var_A, const Matrix& W,
                           const WeightSpec& spec, double t, bool total) {
  FactorStep out = factor_step(X, A, var_A, W, spec, t, total, ErrorCode::SingularColumnSystem);
  out.raw = out.factor;
  return out;
}

FactorStep estimate_A_step(const Matrix& X, const Matrix& B, const Matrix& var_B, const Matrix& W,
                           const WeightSpec& spec, double t, bool total) {
  FactorStep out = factor_step(X.transposed(), B, var_B, W.transposed(), spec, t, total,
                               ErrorCode::SingularRowSystem);
  out.raw = out.factor;
  out.factor = orthonormalize(out.raw);
  return out;
}

namespace {

Matrix entry_variance(const TsvdState& st, double t) {
  const std::size_t m = st.A.rows(), n = st.B.rows(), p = st.A.cols();
  Matrix v(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < p; ++k) {
        acc += st.A(i, k) * st.A(i, k) * st.var_B(j, k) + st.B(j, k) * st.B(j, k) * st.var_A(i, k);
      }
      v(i, j) = t * acc;
    }
  return v;
}

// One full cycle: weights, B-step, A-step with the same weights.
void cycle(const Matrix& X, const TsvdConfig& cfg, double t, TsvdState& st) {
  WeightEvaluation ev;
  if (cfg.total) {
    Matrix v = entry_variance(st, t);
    ev = evaluate_weights(X, st.A, st.B, cfg.spec, st.s, &v);
  } else {
    ev = evaluate_weights(X, st.A, st.B, cfg.spec, st.s);
  }
  st.W = std::move(ev.W);
  st.s = ev.s;
  FactorStep b = estimate_B_step(X, st.A, st.var_A, st.W, cfg.spec, t, cfg.total);
  FactorStep a = estimate_A_step(X, b.factor, b.variances, st.W, cfg.spec, t, cfg.total);
  // B is kept as estimated; only a sign flip made by the orthonormalization is
  // mirrored so that A B' does not change sign
  const std::size_t p = a.factor.cols();
  for (std::size_t k = 0; k < p; ++k) {
    double agree = 0.0;
    for (std::size_t i = 0; i < a.factor.rows(); ++i) agree += a.factor(i, k) * a.raw(i, k);
    if (agree < 0.0)
      for (std::size_t j = 0; j < b.factor.rows(); ++j) b.factor(j, k) = -b.factor(j, k);
  }
  st.A = std::move(a.factor);
  st.B = std::move(b.factor);
  st.var_A = std::move(a.variances);
  st.var_B = std::move(b.variances);
}

double relative_change(const Matrix& cur, const Matrix& prev, double s, double s_prev) {
  double scale = max_abs(cur);
  double change = scale > 0.0 ? max_abs(cur - prev) / scale : max_abs(cur - prev);
  if (s > 0.0) change = std::max(change, std::abs(s - s_prev) / s);
  return change;
}

// Runs one continuation stage to its fixed point; false when max_outer is hit.
bool run_stage(const Matrix& X, const TsvdConfig& cfg, double t, TsvdState& st, int& iterations) {
  Matrix prev = multiply_transposed(st.A, st.B);
  double s_prev = st.s;
  for (int it = 1; it <= cfg.max_outer; ++it) {
    cycle(X, cfg, t, st);
    ++iterations;
    Matrix cur = multiply_transposed(st.A, st.B);
    if (relative_change(cur, prev, st.s, s_prev) < cfg.tol) return true;
    prev = std::move(cur);
    s_prev = st.s;
  }
  return false;
}

}  // namespace

TsvdResult total_svd(const Matrix& X, const TsvdConfig& cfg) {
  X.require_finite("total_svd");
  const std::size_t m = X.rows(), n = X.cols(), p = cfg.rank;
  cfg.validate(m, n);

  BaselineResult init = baseline_alternating_svd(X, p, 1e-13, cfg.seed);
  TsvdState st;
  st.A = std::move(init.A);
  st.B = std::move(init.B);
  st.var_A = Matrix(m, p);
  st.var_B = Matrix(n, p);
  st.W = Matrix(m, n, 1.0);
  st.nu = degrees_of_freedom(m, n, p);
  if (!(static_cast<double>(m * n) > st.nu)) {
    throw Error(ErrorCode::DoFExhausted, "total_svd: too few entries for the requested rank");
  }
  st.s = frobenius_norm(X - multiply_transposed(st.A, st.B)) /
         std::sqrt(static_cast<double>(m * n) - st.nu);

  TsvdResult result;
  const std::vector<double> schedule = cfg.total ? cfg.continuation : std::vector<double>{0.0};
  double t_done = -1.0;
  for (double target : schedule) {
    double t = target;
    int halvings = 0;
    while (true) {
      TsvdState trial = st;
      if (run_stage(X, cfg, t, trial, result.outer_iterations)) {
        st = std::move(trial);
        result.stages.push_back(t);
        t_done = t;
        if (t == target) break;
        t = target;  // retry the remainder of the step
        halvings = 0;
        continue;
      }
      if (t_done < 0.0 || halvings >= cfg.max_halvings) {
        throw ContinuationStallError(
            t, t_done, st,
            fmt::format("total_svd: stage t = {:.4g} exceeded {} outer iterations", t, cfg.max_outer));
      }
      t = t_done + 0.5 * (t - t_done);
      ++halvings;
    }
  }

  result.state = std::move(st);
  result.approximation = multiply_transposed(result.state.A, result.state.B);
  SvdResult svd = singular_values_of(result.state.A, result.state.B);
  result.U = std::move(svd.u);
  result.V = std::move(svd.v);
  result.singular_values = std::move(svd.singular_values);
  result.converged = true;
  return result;
}

SvdResult singular_values_of(const Matrix& A, const Matrix& B) {
  A.require_finite("singular_values_of");
  B.require_finite("singular_values_of");
  const std::size_t p = A.cols();
  SvdResult full = classical_svd(multiply_transposed(A, B));
  std::size_t k = std::min(p, full.singular_values.size());
  Matrix u(full.u.rows(), k), v(full.v.rows(), k);
  std::vector<double> l(k);
  for (std::size_t c = 0; c < k; ++c) {
    l[c] = full.singular_values[c];
    for (std::size_t i = 0; i < u.rows(); ++i) u(i, c) = full.u(i, c);
    for (std::size_t i = 0; i < v.rows(); ++i) v(i, c) = full.v(i, c);
  }
  return SvdResult{std::move(u), DiagonalMatrix(std::move(l)), std::move(v)};
}

double total_objective(const Matrix& X, const Matrix& A, const Matrix& B, const Matrix& var_A,
                       const Matrix& var_B) {
  const std::size_t m = X.rows(), n = X.cols(), p = A.cols();
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double fit = X(i, j) - dot(A.row(i), B.row(j));
      double extra = 0.0;
      for (std::size_t k = 0; k < p; ++k) {
        extra += A(i, k) * A(i, k) * var_B(j, k) + B(j, k) * B(j, k) * var_A(i, k);
      }
      total += fit * fit + extra;
    }
  return total;
}

namespace {

Matrix regression_weights(const Matrix& Y, const Matrix& D, const WeightSpec& spec) {
  Matrix w(Y.rows(), Y.cols());
  RegressionProblem prob;
  prob.D = D;
  for (std::size_t j = 0; j < Y.cols(); ++j) {
    prob.y = Y.column(j);
    RegressionEstimate est = robust_gls(prob, spec, 1e-12, 5000);
    w.set_column(j, est.weights);
  }
  return w;
}

}  // namespace

Matrix column_regression_weights(const Matrix& X, const Matrix& A, const WeightSpec& spec) {
  return regression_weights(X, A, spec);
}

Matrix row_regression_weights(const Matrix& X, const Matrix& B, const WeightSpec& spec) {
  return regression_weights(X.transposed(), B, spec).transposed();
}

}  // namespace robsvd
