#include "robsvd/tables.hpp"

namespace robsvd {

Extrapolated extrapolate_sizes(const std::array<double, 3>& values) {
  Extrapolated out;
  out.at_m = values;
  std::array<std::pair<double, double>, 3> points;
  for (std::size_t i = 0; i < 3; ++i) {
    points[i] = {static_cast<double>(kExtrapolationSizes[i]), values[i]};
  }
  try {
    out.limit = extrapolate(points).t_inf;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularFit) throw;
    out.limit = values[2];
    out.fitted = false;
  }
  return out;
}

Extrapolated extrapolated_breakdown(const WeightSpec& spec, double a) {
  std::array<double, 3> bp{};
  for (std::size_t i = 0; i < 3; ++i) bp[i] = breakdown_point(spec, kExtrapolationSizes[i], a).bp;
  return extrapolate_sizes(bp);
}

ExtrapolatedRates extrapolated_rates(const WeightSpec& spec) {
  std::array<double, 3> bn{}, bs{};
  for (std::size_t i = 0; i < 3; ++i) {
    ConvergenceRates r = convergence_rates(spec, kExtrapolationSizes[i]);
    bn[i] = r.b_n;
    bs[i] = r.b_s;
  }
  return {extrapolate_sizes(bn), extrapolate_sizes(bs)};
}

CalibrationRow calibration_row(const WeightSpec& spec) {
  CalibrationRow row;
  row.k1 = spec.k1();
  row.k2 = spec.k2();
  row.k3 = spec.k3();
  row.efficacy = efficacy(spec.k1(), spec.q());
  if (!spec.robust()) return row;
  row.bp1 = extrapolated_breakdown(spec).limit;
  ExtrapolatedRates rates = extrapolated_rates(spec);
  row.b_n = rates.b_n.limit;
  row.b_s = rates.b_s.limit;
  return row;
}

std::vector<CalibrationRow> calibration_table(std::span<const double> efficacies,
                                              std::span<const double> k3_values) {
  std::vector<CalibrationRow> rows;
  for (double e : efficacies)
    rows.push_back(calibration_row(calibrate(CalibrationTarget::efficacy(e), WeightPower::Four)));
  for (double v : k3_values)
    rows.push_back(calibration_row(calibrate(CalibrationTarget::k3(v), WeightPower::Four)));
  return rows;
}

std::vector<PowerTableCell> power_table(std::span<const double> efficacies,
                                        std::span<const WeightPower> powers) {
  std::vector<PowerTableCell> cells;
  for (double e : efficacies) {
    for (WeightPower q : powers) {
      PowerTableCell cell;
      cell.efficacy = e;
      cell.q = q;
      cell.spec = calibrate(CalibrationTarget::efficacy(e), q);
      cell.bp1 = extrapolated_breakdown(cell.spec);
      cells.push_back(cell);
    }
  }
  return cells;
}

}  // namespace robsvd
