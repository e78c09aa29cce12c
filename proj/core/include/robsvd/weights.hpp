#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

namespace robsvd {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Power q of the weight family w(u) = (1 + |u|^q)^(-1/q).
enum class WeightPower { One, Two, Four, Eight, Infinity };

inline constexpr WeightPower kAllPowers[] = {WeightPower::One, WeightPower::Two,
                                             WeightPower::Four, WeightPower::Eight,
                                             WeightPower::Infinity};

std::string_view to_string(WeightPower q) noexcept;
/// Accepts "1", "2", "4", "8", "inf".
std::optional<WeightPower> parse_weight_power(std::string_view text) noexcept;
/// Numeric exponent; infinity for WeightPower::Infinity.
double exponent(WeightPower q) noexcept;

/// Robustness configuration: weight power plus the tuning constants.
/// k1 = infinity is the least-squares limit (all weights 1, k2 = 1).
class WeightSpec {
 public:
  /// Least squares: k1 = infinity, k2 = 1.
  WeightSpec() = default;
  /// Throws InvalidArgument unless k1 > 0 (or infinite) and k2 > 0.
  WeightSpec(double k1, double k2, WeightPower q = WeightPower::Four);

  static WeightSpec least_squares(WeightPower q = WeightPower::Four) {
    WeightSpec s;
    s.q_ = q;
    return s;
  }

  WeightPower q() const noexcept { return q_; }
  double k1() const noexcept { return k1_; }
  double k2() const noexcept { return k2_; }
  double k3() const noexcept { return k3_; }
  bool robust() const noexcept { return std::isfinite(k1_); }

  std::string describe() const;

 private:
  WeightPower q_ = WeightPower::Four;
  double k1_ = kInfinity;
  double k2_ = 1.0;
  double k3_ = kInfinity;
};

/// w(u) in (0, 1]; min(1, 1/|u|) for q = infinity.
double weight(double u, WeightPower q) noexcept;

/// Gaussian consistency factor k2 for tuning constant k1 (u = x / k1).
/// Throws QuadratureFailure when the absolute tolerance 1e-9 is not met.
double correction_k2(double k1, WeightPower q);

/// Asymptotic efficacy (E w)^2 / E w^2 under the standard normal.
double efficacy(double k1, WeightPower q);

struct CalibrationTarget {
  enum class Kind { Efficacy, K3 };
  Kind kind;
  double value;

  static CalibrationTarget efficacy(double e) { return {Kind::Efficacy, e}; }
  static CalibrationTarget k3(double v) { return {Kind::K3, v}; }
};

/// Solves for k1 by bisection on [1e-4, 1e4] and fills k2, k3.
/// Throws TargetUnreachable when the bracket does not straddle the target.
WeightSpec calibrate(CalibrationTarget target, WeightPower q);

/// Closed-form rational approximation of k2 as a function of k3 (q = 4).
/// Throws PoleAtDenominatorZero where the denominator vanishes.
double k2_of_k3_approx(double k3);

}  // namespace robsvd
