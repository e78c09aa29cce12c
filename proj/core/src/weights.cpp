#include "robsvd/weights.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include <cmath>
#include <numbers>

#include "robsvd/error.hpp"

namespace robsvd {

namespace {

constexpr double kUpper = 40.0;
constexpr double kAbsTol = 1e-9;

double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// 2 * integral over [0, 40] of f(x) phi(x), split where the weight changes shape.
template <class F>
double gaussian_integral(F f, double k1) {
  using boost::math::quadrature::gauss_kronrod;
  auto g = [&](double x) { return f(x) * phi(x); };
  double cuts[4] = {0.0, 0.0, 0.0, kUpper};
  int count = 1;
  if (k1 < kUpper) cuts[count++] = k1;
  if (10.0 * k1 < kUpper) cuts[count++] = 10.0 * k1;
  cuts[count++] = kUpper;
  double total = 0.0;
  double total_err = 0.0;
  for (int i = 0; i + 1 < count; ++i) {
    double err = 0.0;
    total += gauss_kronrod<double, 31>::integrate(g, cuts[i], cuts[i + 1], 12, 1e-11, &err);
    total_err += err;
  }
  if (!std::isfinite(total) || 2.0 * total_err > kAbsTol) {
    throw Error(ErrorCode::QuadratureFailure,
                fmt::format("quadrature error estimate {:.3g} exceeds {:.1g}", 2 * total_err,
                            kAbsTol));
  }
  return 2.0 * total;
}

void require_k1(double k1, const char* what) {
  if (!(k1 > 0.0)) throw Error(ErrorCode::InvalidArgument, fmt::format("{}: k1 must be > 0", what));
}

}  // namespace

std::string_view to_string(WeightPower q) noexcept {
  switch (q) {
    case WeightPower::One: return "1";
    case WeightPower::Two: return "2";
    case WeightPower::Four: return "4";
    case WeightPower::Eight: return "8";
    case WeightPower::Infinity: return "inf";
  }
  return "?";
}

std::optional<WeightPower> parse_weight_power(std::string_view text) noexcept {
  for (WeightPower q : kAllPowers)
    if (text == to_string(q)) return q;
  if (text == "Inf" || text == "infinity" || text == "∞") return WeightPower::Infinity;
  return std::nullopt;
}

double exponent(WeightPower q) noexcept {
  switch (q) {
    case WeightPower::One: return 1.0;
    case WeightPower::Two: return 2.0;
    case WeightPower::Four: return 4.0;
    case WeightPower::Eight: return 8.0;
    case WeightPower::Infinity: return kInfinity;
  }
  return kInfinity;
}

WeightSpec::WeightSpec(double k1, double k2, WeightPower q) : q_(q), k1_(k1), k2_(k2) {
  require_k1(k1, "WeightSpec");
  if (!(k2 > 0.0) || !std::isfinite(k2)) {
    throw Error(ErrorCode::InvalidArgument, "WeightSpec: k2 must be finite and > 0");
  }
  if (std::isinf(k1)) k2_ = 1.0;
  k3_ = k1_ * k2_;
}

std::string WeightSpec::describe() const {
  if (!robust()) return fmt::format("q={} k1=inf k2=1 k3=inf", to_string(q_));
  return fmt::format("q={} k1={:.4f} k2={:.4f} k3={:.4f}", to_string(q_), k1_, k2_, k3_);
}

double weight(double u, WeightPower q) noexcept {
  double a = std::abs(u);
  if (a == 0.0) return 1.0;
  if (q == WeightPower::Infinity) return a <= 1.0 ? 1.0 : 1.0 / a;
  double e = exponent(q);
  if (a <= 1.0) return std::pow(1.0 + std::pow(a, e), -1.0 / e);
  // same value written so that huge |u| neither overflows nor underflows to 0
  return 1.0 / (a * std::pow(1.0 + std::pow(a, -e), 1.0 / e));
}

double correction_k2(double k1, WeightPower q) {
  require_k1(k1, "correction_k2");
  if (std::isinf(k1)) return 1.0;
  auto w2 = [&](double x) {
    double w = weight(x / k1, q);
    return w * w;
  };
  double num = gaussian_integral(w2, k1);
  double den = gaussian_integral([&](double x) { return w2(x) * x * x; }, k1);
  return std::sqrt(num / den);
}

double efficacy(double k1, WeightPower q) {
  require_k1(k1, "efficacy");
  if (std::isinf(k1)) return 1.0;
  double m1 = gaussian_integral([&](double x) { return weight(x / k1, q); }, k1);
  double m2 = gaussian_integral(
      [&](double x) {
        double w = weight(x / k1, q);
        return w * w;
      },
      k1);
  return m1 * m1 / m2;
}

WeightSpec calibrate(CalibrationTarget target, WeightPower q) {
  const bool by_efficacy = target.kind == CalibrationTarget::Kind::Efficacy;
  if (by_efficacy) {
    if (!(target.value > 0.0 && target.value <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "calibrate: efficacy must lie in (0, 1]");
    }
    if (target.value == 1.0) return WeightSpec::least_squares(q);
  } else {
    if (!(target.value > 0.0)) throw Error(ErrorCode::InvalidArgument, "calibrate: k3 must be > 0");
    if (std::isinf(target.value)) return WeightSpec::least_squares(q);
  }

  auto f = [&](double k1) {
    return by_efficacy ? efficacy(k1, q) : k1 * correction_k2(k1, q);
  };
  // both quantities increase with k1; bisect in log k1
  double lo = std::log(1e-4), hi = std::log(1e4);
  double flo = f(std::exp(lo)) - target.value;
  double fhi = f(std::exp(hi)) - target.value;
  if (flo > 0.0 || fhi < 0.0) {
    throw Error(ErrorCode::TargetUnreachable,
                fmt::format("calibrate: target {} outside the range reachable on [1e-4, 1e4]",
                            target.value));
  }
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    double fm = f(std::exp(mid)) - target.value;
    if (std::abs(fm) < 1e-10 || hi - lo < 1e-15) break;
    if (fm < 0.0) lo = mid; else hi = mid;
  }
  double k1 = std::exp(mid);
  return WeightSpec(k1, correction_k2(k1, q), q);
}

double k2_of_k3_approx(double k3) {
  if (!(k3 > 0.0) || !std::isfinite(k3)) {
    throw Error(ErrorCode::InvalidArgument, "k2_of_k3_approx: k3 must be finite and > 0");
  }
  double l = std::log(k3);
  double den = 1.0 - 0.3425 * l;
  if (std::abs(den) < 1e-12) {
    throw Error(ErrorCode::PoleAtDenominatorZero, "k2_of_k3_approx: denominator vanishes");
  }
  return std::exp((0.4762 - 0.8465 * l + 0.4554 * l * l) / den);
}

}  // namespace robsvd
