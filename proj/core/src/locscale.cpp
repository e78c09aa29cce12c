#include "robsvd/locscale.hpp"

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace robsvd {

namespace {

double mult_at(std::span<const double> mult, std::size_t i) {
  return mult.empty() ? 1.0 : mult[i];
}

// Median of xs counted with multiplicities: midpoint of the lower and upper
// weighted medians.
double weighted_median(std::span<const double> xs, std::span<const double> mult) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (mult_at(mult, i) > 0.0) idx.push_back(i);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  double total = 0.0;
  for (std::size_t i : idx) total += mult_at(mult, i);
  double half = 0.5 * total;
  double lo = xs[idx.back()], hi = xs[idx.back()];
  double cum = 0.0;
  bool have_lo = false;
  for (std::size_t i : idx) {
    cum += mult_at(mult, i);
    if (!have_lo && cum >= half) {
      lo = xs[i];
      have_lo = true;
    }
    if (cum > half) {
      hi = xs[i];
      break;
    }
  }
  return 0.5 * (lo + hi);
}

std::pair<double, double> default_start(std::span<const double> xs, std::span<const double> mult) {
  double med = weighted_median(xs, mult);
  std::vector<double> dev(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) dev[i] = std::abs(xs[i] - med);
  double mad = 1.4826 * weighted_median(dev, mult);
  if (mad > 0.0) return {med, mad};
  // MAD collapses when more than half the mass sits on one value
  double sw = 0.0, sx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sw += mult_at(mult, i);
    sx += mult_at(mult, i) * xs[i];
  }
  double mean = sx / sw;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) ss += mult_at(mult, i) * (xs[i] - mean) * (xs[i] - mean);
  return {mean, std::sqrt(ss / sw)};
}

LocationScaleEstimate finish(std::span<const double> xs, std::span<const double> mult,
                             const WeightSpec& spec, double n, double s, int iterations,
                             bool converged) {
  LocationScaleEstimate est;
  est.n = n;
  est.s_x = s;
  est.iterations = iterations;
  est.converged = converged;
  est.weights.resize(xs.size());
  double sw = 0.0, sw2 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double w = spec.robust() ? weight((xs[i] - n) / (spec.k1() * s), spec.q()) : 1.0;
    est.weights[i] = w;
    sw += mult_at(mult, i) * w;
    sw2 += mult_at(mult, i) * w * w;
  }
  est.n_eff = sw * sw / sw2;
  est.sigma2_hat = est.n_eff > 1.0 ? est.n_eff / (est.n_eff - 1.0) * s * s : kInfinity;
  return est;
}

// Componentwise Aitken delta-squared; falls back to x2 when the sequence is
// not visibly geometric.
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

}  // namespace

std::vector<double> gaussian_quantile_sample(std::size_t m) {
  if (m == 0) throw Error(ErrorCode::InvalidArgument, "gaussian_quantile_sample: m must be >= 1");
  boost::math::normal_distribution<double> normal;
  std::vector<double> xs(m, 0.0);
  for (std::size_t i = 0; i < m / 2; ++i) {
    double p = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
    double x = boost::math::quantile(normal, p);
    xs[i] = x;
    xs[m - 1 - i] = -x;
  }
  return xs;
}

std::pair<double, double> locscale_update(std::span<const double> xs, const WeightSpec& spec,
                                          double n, double s, std::span<const double> mult) {
  double sw = 0.0, swx = 0.0;
  std::vector<double> w(xs.size(), 1.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (spec.robust()) w[i] = weight((xs[i] - n) / (spec.k1() * s), spec.q());
    double c = mult_at(mult, i) * w[i];
    sw += c;
    swx += c * xs[i];
  }
  double n_new = swx / sw;
  double sw2 = 0.0, sw2r2 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double c = mult_at(mult, i) * w[i] * w[i];
    double r = xs[i] - n_new;
    sw2 += c;
    sw2r2 += c * r * r;
  }
  return {n_new, spec.k2() * std::sqrt(sw2r2 / sw2)};
}

LocationScaleEstimate estimate(std::span<const double> xs, const WeightSpec& spec,
                               const EstimateOptions& options) {
  const auto mult = options.multiplicities;
  if (!mult.empty() && mult.size() != xs.size()) {
    throw Error(ErrorCode::InvalidArgument, "estimate: multiplicities size mismatch");
  }
  if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "estimate: tol must be > 0");
  double mass = 0.0;
  std::size_t support = 0;
  double first = 0.0;
  bool all_equal = true;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i])) throw Error(ErrorCode::InvalidArgument, "estimate: non-finite sample");
    double c = mult_at(mult, i);
    if (c < 0.0) throw Error(ErrorCode::InvalidArgument, "estimate: negative multiplicity");
    if (c == 0.0) continue;
    if (support == 0) first = xs[i];
    else if (xs[i] != first) all_equal = false;
    ++support;
    mass += c;
  }
  if (support == 0) throw Error(ErrorCode::InvalidArgument, "estimate: empty sample");
  if (all_equal) throw DegenerateSampleError(first);
  if (mult.empty() && xs.size() < 2) throw Error(ErrorCode::InvalidArgument, "estimate: m >= 2");

  auto [n, s] = options.start ? *options.start : default_start(xs, mult);
  if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "estimate: starting scale must be > 0");

  std::array<std::pair<double, double>, 3> history{};
  int filled = 0;
  history[filled++] = {n, s};
  for (int it = 1; it <= options.max_iter; ++it) {
    auto [n1, s1] = locscale_update(xs, spec, n, s, mult);
    bool done = std::abs(n1 - n) < options.tol * s1 && std::abs(s1 - s) < options.tol * s1;
    n = n1;
    s = s1;
    if (done || !spec.robust()) return finish(xs, mult, spec, n, s, it, true);
    if (!options.accelerate) continue;
    history[filled++] = {n, s};
    if (filled == 3) {
      double na = aitken(history[0].first, history[1].first, history[2].first);
      double sa = aitken(history[0].second, history[1].second, history[2].second);
      if (std::isfinite(na) && sa > 0.0 && std::isfinite(sa)) {
        n = na;
        s = sa;
      }
      filled = 0;
      history[filled++] = {n, s};
    }
  }
  throw MaxIterError<LocationScaleEstimate>(
      finish(xs, mult, spec, n, s, options.max_iter, false),
      fmt::format("estimate: no convergence after {} iterations", options.max_iter));
}

LocationScaleEstimate estimate(std::span<const double> xs, const WeightSpec& spec, double tol,
                               int max_iter) {
  EstimateOptions options;
  options.tol = tol;
  options.max_iter = max_iter;
  return estimate(xs, spec, options);
}

BreakdownResult breakdown_point(const WeightSpec& spec, std::size_t m, double a) {
  if (m < 10) throw Error(ErrorCode::InvalidArgument, "breakdown_point: m must be >= 10");
  if (!(a > 0.0)) throw Error(ErrorCode::InvalidArgument, "breakdown_point: a must be > 0");

  std::vector<double> xs = gaussian_quantile_sample(m);
  xs.push_back(kContaminationPoint);
  std::vector<double> mult(m + 1, 1.0);
  mult[m] = 0.0;

  EstimateOptions options;
  options.tol = 1e-12;
  options.max_iter = 20000;
  options.multiplicities = mult;

  BreakdownResult result;
  LocationScaleEstimate est = estimate(xs, spec, options);
  result.offsets.emplace_back(0.0, std::abs(est.n));
  for (std::size_t k = 1; k <= m; ++k) {
    mult[m] = static_cast<double>(k);
    options.start = std::make_pair(est.n, est.s_x);
    est = estimate(xs, spec, options);
    double offset = std::abs(est.n);
    auto [k_prev, off_prev] = result.offsets.back();
    if (offset < off_prev) result.monotone = false;
    result.offsets.emplace_back(static_cast<double>(k), offset);
    if (offset >= a) {
      result.k_star = k_prev + (a - off_prev) / (offset - off_prev);
      result.bp = result.k_star / (static_cast<double>(m) + result.k_star);
      return result;
    }
  }
  throw Error(ErrorCode::NeverBreaks,
              fmt::format("breakdown_point: offset stays below {} up to k = m = {} (bp >= 0.5)", a, m));
}

namespace {

// Geometric mean of the last ten error ratios before the error drops under 1e-11.
double measure_rate(std::span<const double> xs, const WeightSpec& spec, double n0, double s0,
                    bool location, double n_inf, double s_inf) {
  std::vector<double> errors;
  double n = n0, s = s0;
  auto err = [&] { return (location ? std::abs(n - n_inf) : std::abs(s - s_inf)) / s_inf; };
  errors.push_back(err());
  for (int it = 0; it < 5000 && errors.back() >= 1e-11; ++it) {
    std::tie(n, s) = locscale_update(xs, spec, n, s);
    errors.push_back(err());
  }
  std::vector<double> ratios;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    if (errors[i + 1] < 1e-11) break;
    ratios.push_back(errors[i + 1] / errors[i]);
  }
  if (ratios.empty()) return 0.0;
  std::size_t take = std::min<std::size_t>(10, ratios.size());
  std::span<const double> tail(ratios.data() + ratios.size() - take, take);
  double log_sum = 0.0;
  for (double r : tail) log_sum += std::log(r);
  double mean = std::exp(log_sum / static_cast<double>(take));
  auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
  if (*hi - *lo > 0.1 * mean) {
    throw Error(ErrorCode::RateUnstable,
                fmt::format("convergence_rates: ratios spread over [{:.4f}, {:.4f}]", *lo, *hi));
  }
  return mean;
}

}  // namespace

ConvergenceRates convergence_rates(const WeightSpec& spec, std::size_t m) {
  if (m < 100) throw Error(ErrorCode::InvalidArgument, "convergence_rates: m must be >= 100");
  if (!spec.robust()) return {};
  std::vector<double> xs = gaussian_quantile_sample(m);
  EstimateOptions options;
  options.tol = 1e-15;
  options.max_iter = 5000;
  LocationScaleEstimate fixed;
  try {
    fixed = estimate(xs, spec, options);
  } catch (const MaxIterError<LocationScaleEstimate>& e) {
    // rounding keeps the last digit moving; that iterate is as good as it gets
    fixed = e.last();
  }
  const double n_inf = fixed.n, s_inf = fixed.s_x;
  ConvergenceRates rates;
  rates.b_n = measure_rate(xs, spec, n_inf + 0.5 * s_inf, s_inf, true, n_inf, s_inf);
  rates.b_s = measure_rate(xs, spec, n_inf, 1.5 * s_inf, false, n_inf, s_inf);
  return rates;
}

AsymptoteFit extrapolate(std::array<std::pair<double, double>, 3> points) {
  std::sort(points.begin(), points.end());
  auto [m1, a] = points[0];
  auto [m2, b] = points[1];
  auto [m3, c] = points[2];
  if (m1 == m2 || m2 == m3) throw Error(ErrorCode::InvalidArgument, "extrapolate: m values must differ");
  double scale = std::max({1.0, std::abs(a), std::abs(b), std::abs(c)});
  if (std::abs(a - b) <= 1e-14 * scale && std::abs(b - c) <= 1e-14 * scale) return {c, 0.0, 0.0};
  if (!((a - b) * (b - c) > 0.0)) {
    throw Error(ErrorCode::SingularFit,
                fmt::format("extrapolate: values {} {} {} are not monotone in m", a, b, c));
  }
  // eliminating t_inf and t1 leaves a linear equation in t2
  double r = (a - b) / (b - c);
  double den = r * (m3 - m2) - (m2 - m1);
  if (den == 0.0) throw Error(ErrorCode::SingularFit, "extrapolate: degenerate system");
  double t2 = ((m2 - m1) * m3 - r * (m3 - m2) * m1) / den;
  double t1 = (a - b) * (m1 + t2) * (m2 + t2) / (m2 - m1);
  double t_inf = a - t1 / (m1 + t2);
  if (!std::isfinite(t_inf) || !std::isfinite(t1) || !std::isfinite(t2)) {
    throw Error(ErrorCode::SingularFit, "extrapolate: non-finite fit");
  }
  return {t_inf, t1, t2};
}

}  // namespace robsvd
