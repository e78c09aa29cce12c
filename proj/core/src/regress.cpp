#include "robsvd/regress.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "robsvd/error.hpp"

namespace robsvd {

void RegressionProblem::validate() const {
  if (D.rows() == 0 || D.cols() == 0) throw Error(ErrorCode::InvalidArgument, "regress: empty design");
  if (y.size() != D.rows()) throw Error(ErrorCode::InvalidArgument, "regress: y and D disagree in length");
  if (D.rows() < D.cols()) throw Error(ErrorCode::InvalidArgument, "regress: need n >= p");
  D.require_finite("regress design");
  for (double v : y)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "regress: non-finite response");
  if (!S.empty()) {
    if (S.rows() != D.rows() || S.cols() != D.cols()) {
      throw Error(ErrorCode::InvalidArgument, "regress: S must be n x p");
    }
    S.require_finite("regress S");
    for (double v : S.data())
      if (v < 0.0) throw Error(ErrorCode::InvalidArgument, "regress: negative design variance");
  }
}

WeightedSolve weighted_solve(std::span<const double> y, const Matrix& D, const Matrix& S, double t,
                             std::span<const double> w2) {
  const std::size_t n = D.rows(), p = D.cols();
  Matrix j(p, p);
  std::vector<double> rhs(p, 0.0);
  double sw2 = 0.0, sw4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double w = w2[i];
    sw2 += w;
    sw4 += w * w;
    if (w == 0.0) continue;
    auto d = D.row(i);
    for (std::size_t a = 0; a < p; ++a) {
      rhs[a] += w * d[a] * y[i];
      for (std::size_t b = 0; b < p; ++b) j(a, b) += w * d[a] * d[b];
      if (!S.empty()) j(a, a) += w * t * S(i, a);
    }
  }
  WeightedSolve out;
  out.j_inv = inverse(j);
  out.j = std::move(j);
  out.beta.assign(p, 0.0);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) out.beta[a] += out.j_inv(a, b) * rhs[b];
  out.residuals.resize(n);
  double swr2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.residuals[i] = y[i] - dot(D.row(i), out.beta);
    swr2 += w2[i] * out.residuals[i] * out.residuals[i];
  }
  out.s2 = swr2 / sw2;
  out.n_eff = sw2 * sw2 / sw4;
  return out;
}

Matrix weighted_covariance(const WeightedSolve& solve, const Matrix& D, const Matrix& S, double t,
                           std::span<const double> w2, double k2) {
  const std::size_t n = D.rows(), p = D.cols();
  const double big_n = solve.n_eff;
  if (!(big_n > static_cast<double>(p))) {
    throw Error(ErrorCode::DegenerateDoF,
                fmt::format("covariance: effective size {:.4g} does not exceed p = {}", big_n, p));
  }
  Matrix m(p, p);
  std::vector<double> sb(p);
  for (std::size_t i = 0; i < n; ++i) {
    double w4 = w2[i] * w2[i];
    if (w4 == 0.0) continue;
    auto d = D.row(i);
    for (std::size_t a = 0; a < p; ++a) sb[a] = S.empty() ? 0.0 : t * S(i, a) * solve.beta[a];
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b)
        m(a, b) += w4 * (solve.s2 * d[a] * d[b] + sb[a] * sb[b]);
  }
  Matrix c = solve.j_inv * m * solve.j_inv;
  double factor = k2 * k2 * big_n / (big_n - static_cast<double>(p));
  Matrix sym(p, p);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) sym(a, b) = 0.5 * factor * (c(a, b) + c(b, a));
  return sym;
}

namespace {

struct GlsState {
  std::vector<double> beta;
  double s = 0.0;
};

std::vector<double> residuals_of(const RegressionProblem& prob, std::span<const double> beta) {
  std::vector<double> r(prob.y.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = prob.y[i] - dot(prob.D.row(i), beta);
  return r;
}

std::vector<double> weights_of(std::span<const double> r, double s, const WeightSpec& spec) {
  std::vector<double> w(r.size(), 1.0);
  if (!spec.robust() || s == 0.0) return w;
  for (std::size_t i = 0; i < r.size(); ++i) w[i] = weight(r[i] / (spec.k3() * s), spec.q());
  return w;
}

GlsState gls_update(const RegressionProblem& prob, const WeightSpec& spec, const GlsState& x) {
  auto r = residuals_of(prob, x.beta);
  auto w = weights_of(r, x.s, spec);
  for (double& v : w) v *= v;
  WeightedSolve sol = weighted_solve(prob.y, prob.D, prob.S, 1.0, w);
  return {std::move(sol.beta), std::sqrt(sol.s2)};
}

double step_size(const GlsState& a, const GlsState& b) {
  double d = std::abs(b.s - a.s);
  for (std::size_t k = 0; k < a.beta.size(); ++k) d = std::max(d, std::abs(b.beta[k] - a.beta[k]));
  return d;
}

double aitken(double x0, double x1, double x2) {
  double d1 = x1 - x0, d2 = x2 - x1;
  // only a contracting sequence has a limit worth jumping to
  if (!(std::abs(d2) < std::abs(d1))) return x2;
  double den = d2 - d1;
  if (den == 0.0 || !std::isfinite(den)) return x2;
  double step = d2 * d2 / den;
  if (!std::isfinite(step) || std::abs(step) > 100.0 * std::abs(d2)) return x2;
  return x2 - step;
}

RegressionEstimate finish(const RegressionProblem& prob, const WeightSpec& spec, GlsState x,
                          int iterations, bool converged) {
  RegressionEstimate est;
  est.beta = std::move(x.beta);
  est.s = x.s;
  est.iterations = iterations;
  est.converged = converged;
  est.weights = weights_of(residuals_of(prob, est.beta), est.s, spec);
  double sw2 = 0.0, sw4 = 0.0;
  for (double w : est.weights) {
    sw2 += w * w;
    sw4 += w * w * w * w;
  }
  est.n_eff = sw2 * sw2 / sw4;
  if (est.n_eff > static_cast<double>(prob.D.cols())) est.cov_beta = covariance(est, prob, spec);
  return est;
}

}  // namespace

RegressionEstimate robust_gls(const RegressionProblem& prob, const WeightSpec& spec,
                              const RegressOptions& options) {
  prob.validate();
  if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "robust_gls: tol must be > 0");

  std::vector<double> ones(prob.y.size(), 1.0);
  WeightedSolve init = weighted_solve(prob.y, prob.D, prob.S, 1.0, ones);
  GlsState x{init.beta, std::sqrt(init.s2)};

  double yscale = 0.0;
  for (double v : prob.y) yscale = std::max(yscale, std::abs(v));
  auto exact_fit = [&](double s) { return s <= 1e-14 * std::max(yscale, 1e-300); };
  if (exact_fit(x.s)) {
    x.s = 0.0;
    return finish(prob, spec, std::move(x), 1, true);
  }
  if (!spec.robust()) return finish(prob, spec, std::move(x), 1, true);

  const std::size_t p = prob.D.cols();
  std::vector<GlsState> history{x};
  for (int it = 1; it <= options.max_iter; ++it) {
    GlsState next = gls_update(prob, spec, x);
    if (exact_fit(next.s)) {
      next.s = 0.0;
      return finish(prob, spec, std::move(next), it, true);
    }
    double change = step_size(x, next);
    x = std::move(next);
    if (change < options.tol * x.s) return finish(prob, spec, std::move(x), it, true);
    if (!options.accelerate) continue;
    history.push_back(x);
    if (history.size() == 3) {
      GlsState acc = x;
      for (std::size_t a = 0; a < p; ++a)
        acc.beta[a] = aitken(history[0].beta[a], history[1].beta[a], history[2].beta[a]);
      acc.s = aitken(history[0].s, history[1].s, history[2].s);
      bool ok = acc.s > 0.0 && std::isfinite(acc.s) &&
                std::all_of(acc.beta.begin(), acc.beta.end(), [](double v) { return std::isfinite(v); });
      // keep the extrapolation only if it lands closer to the fixed point
      if (ok) {
        GlsState mapped = gls_update(prob, spec, acc);
        if (!exact_fit(mapped.s) && step_size(acc, mapped) < change) {
          ++it;
          x = std::move(mapped);
        }
      }
      history.assign(1, x);
    }
  }
  throw MaxIterError<RegressionEstimate>(
      finish(prob, spec, std::move(x), options.max_iter, false),
      fmt::format("robust_gls: no convergence after {} iterations", options.max_iter));
}

RegressionEstimate robust_gls(const RegressionProblem& prob, const WeightSpec& spec, double tol,
                              int max_iter) {
  RegressOptions options;
  options.tol = tol;
  options.max_iter = max_iter;
  return robust_gls(prob, spec, options);
}

namespace {

// J and J^-1 at the estimate's weights, with the estimate's beta and s.
WeightedSolve solve_at(const RegressionEstimate& est, const RegressionProblem& prob,
                       std::vector<double>& w2) {
  w2.resize(est.weights.size());
  for (std::size_t i = 0; i < w2.size(); ++i) w2[i] = est.weights[i] * est.weights[i];
  WeightedSolve sol = weighted_solve(prob.y, prob.D, prob.S, 1.0, w2);
  sol.beta = est.beta;
  sol.s2 = est.s * est.s;
  sol.residuals = residuals_of(prob, est.beta);
  return sol;
}

}  // namespace

Matrix covariance(const RegressionEstimate& est, const RegressionProblem& prob,
                  const WeightSpec& spec) {
  std::vector<double> w2;
  WeightedSolve sol = solve_at(est, prob, w2);
  return weighted_covariance(sol, prob.D, prob.S, 1.0, w2, spec.k2());
}

Matrix sandwich_covariance(const RegressionEstimate& est, const RegressionProblem& prob,
                           const WeightSpec& spec) {
  std::vector<double> w2;
  WeightedSolve sol = solve_at(est, prob, w2);
  const std::size_t n = prob.D.rows(), p = prob.D.cols();
  if (!(sol.n_eff > static_cast<double>(p))) {
    throw Error(ErrorCode::DegenerateDoF, "sandwich_covariance: effective size does not exceed p");
  }
  Matrix m(p, p);
  std::vector<double> g(p);
  for (std::size_t i = 0; i < n; ++i) {
    double w4 = w2[i] * w2[i];
    for (std::size_t a = 0; a < p; ++a) {
      double sb = prob.S.empty() ? 0.0 : prob.S(i, a) * est.beta[a];
      g[a] = sol.residuals[i] * prob.D(i, a) - sb;
    }
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b) m(a, b) += w4 * g[a] * g[b];
  }
  Matrix c = sol.j_inv * m * sol.j_inv;
  double k2 = spec.k2();
  double factor = k2 * k2 * sol.n_eff / (sol.n_eff - static_cast<double>(p));
  Matrix sym(p, p);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) sym(a, b) = 0.5 * factor * (c(a, b) + c(b, a));
  return sym;
}

}  // namespace robsvd
