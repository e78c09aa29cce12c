#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "robsvd/error.hpp"
#include "robsvd/weights.hpp"

namespace robsvd {

struct LocationScaleEstimate {
  double n = 0.0;           // location
  double s_x = 0.0;         // scatter
  double sigma2_hat = 0.0;  // N/(N-1) * s_x^2
  std::vector<double> weights;
  double n_eff = 0.0;       // (sum w)^2 / sum w^2
  int iterations = 0;
  bool converged = false;
};

/// All observations coincide; carries the common value.
class DegenerateSampleError : public Error {
 public:
  explicit DegenerateSampleError(double location)
      : Error(ErrorCode::Degenerate, "estimate: zero scatter (all points equal)"),
        location_(location) {}
  double location() const noexcept { return location_; }

 private:
  double location_;
};

struct EstimateOptions {
  double tol = 1e-10;
  int max_iter = 500;
  /// Aitken extrapolation every third step.
  bool accelerate = true;
  /// Starting point; median/MAD when absent.
  std::optional<std::pair<double, double>> start;
  /// Per-observation multiplicities (fractional allowed); all 1 when empty.
  std::span<const double> multiplicities;
};

/// Phi^-1((i - 1/2) / m) for i = 1..m, ascending and exactly antisymmetric.
std::vector<double> gaussian_quantile_sample(std::size_t m);

/// One application of the weighted location-scale map.
std::pair<double, double> locscale_update(std::span<const double> xs, const WeightSpec& spec,
                                          double n, double s,
                                          std::span<const double> multiplicities = {});

/// Fixed point of the weighted location-scale map.
/// Throws DegenerateSampleError, MaxIterError<LocationScaleEstimate>.
LocationScaleEstimate estimate(std::span<const double> xs, const WeightSpec& spec,
                               const EstimateOptions& options);
LocationScaleEstimate estimate(std::span<const double> xs, const WeightSpec& spec,
                               double tol = 1e-10, int max_iter = 500);

struct BreakdownResult {
  double bp = 0.0;
  double k_star = 0.0;
  /// (k, offset) at every integer k visited, starting at k = 0.
  std::vector<std::pair<double, double>> offsets;
  bool monotone = true;
};

/// Value at which the contaminating points are placed.
inline constexpr double kContaminationPoint = 1e6;

/// Contaminates the m-quantile sample with k points at 1e6, k = 0, 1, ...,
/// until the location offset reaches `a`; k* interpolates linearly between
/// the bracketing integers. Throws NeverBreaks when k = m is not enough.
BreakdownResult breakdown_point(const WeightSpec& spec, std::size_t m, double a = 1.0);

struct ConvergenceRates {
  double b_n = 0.0;
  double b_s = 0.0;
};

/// Linear convergence factors of the unaccelerated map on the m-quantile
/// sample, measured from a location-only and a scale-only perturbation.
/// Throws RateUnstable when the last ratios spread beyond 10% of their mean.
ConvergenceRates convergence_rates(const WeightSpec& spec, std::size_t m);

/// t(m) = t_inf + t1 / (m + t2).
struct AsymptoteFit {
  double t_inf = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  double operator()(double m) const { return t_inf + t1 / (m + t2); }
};

/// Exact fit through three (m, t) points. Throws SingularFit unless the
/// values are strictly monotone in m or all equal.
AsymptoteFit extrapolate(std::array<std::pair<double, double>, 3> points);

inline constexpr std::array<std::size_t, 3> kExtrapolationSizes = {100, 300, 900};

}  // namespace robsvd
