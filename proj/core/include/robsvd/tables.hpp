#pragma once

#include <array>
#include <span>
#include <vector>

#include "robsvd/locscale.hpp"
#include "robsvd/weights.hpp"

namespace robsvd {

/// A quantity measured at m = 100, 300, 900 and its m -> infinity limit.
struct Extrapolated {
  std::array<double, 3> at_m{};
  double limit = 0.0;
  /// False when the three values were not monotone and `limit` is the m = 900 value.
  bool fitted = true;
};

/// Extrapolates three values measured at kExtrapolationSizes.
Extrapolated extrapolate_sizes(const std::array<double, 3>& values);

Extrapolated extrapolated_breakdown(const WeightSpec& spec, double a = 1.0);

struct ExtrapolatedRates {
  Extrapolated b_n;
  Extrapolated b_s;
};
ExtrapolatedRates extrapolated_rates(const WeightSpec& spec);

/// One row of the calibration table.
struct CalibrationRow {
  double efficacy = 1.0;
  double k1 = kInfinity;
  double k2 = 1.0;
  double k3 = kInfinity;
  double bp1 = 0.0;
  double b_n = 0.0;
  double b_s = 0.0;
};

CalibrationRow calibration_row(const WeightSpec& spec);

inline constexpr std::array<double, 13> kTableEfficacies = {
    0.5, 0.6, 0.7, 0.75, 0.8, 0.85, 0.9, 0.92, 0.94, 0.96, 0.98, 0.99, 1.0};
inline constexpr std::array<double, 7> kTableK3 = {0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};

/// Rows for the given efficacies followed by the rows for the given k3 values (q = 4).
std::vector<CalibrationRow> calibration_table(std::span<const double> efficacies,
                                              std::span<const double> k3_values);

struct PowerTableCell {
  double efficacy = 0.0;
  WeightPower q = WeightPower::Four;
  WeightSpec spec;
  Extrapolated bp1;
};

/// Breakdown point for every (efficacy, q) pair, efficacy-major.
std::vector<PowerTableCell> power_table(std::span<const double> efficacies,
                                        std::span<const WeightPower> powers);

}  // namespace robsvd
