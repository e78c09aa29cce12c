// robsvd command-line front end.
#include <CLI11.hpp>
#include <fmt/format.h>
#include <robsvd/robsvd.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace robsvd;

struct Common {
  std::string input;
  std::string out;
  std::string q = "4";
  std::string k1;
  std::string k3;
  std::optional<double> efficacy;
  double tol = 0.0;  // 0 means the command's default
  std::uint64_t seed = 42;
  bool header = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_input = true) {
  if (with_input) {
    cmd->add_option("--input", c.input, "CSV input file");
    cmd->add_flag("--header", c.header, "First CSV line holds column names");
  }
  cmd->add_option("--out", c.out, "Write the full result to this file");
  cmd->add_option("--q", c.q, "Weight power: 1, 2, 4, 8 or inf")->default_val("4");
  auto* k1 = cmd->add_option("--k1", c.k1, "Tuning constant k1 (or inf)");
  auto* k3 = cmd->add_option("--k3", c.k3, "Tuning constant k3 = k1*k2 (or inf)");
  auto* eff = cmd->add_option("--efficacy", c.efficacy, "Target efficacy in (0, 1]");
  k1->excludes(k3, eff);
  k3->excludes(eff);
  cmd->add_option("--tol", c.tol, "Convergence tolerance");
  cmd->add_option("--seed", c.seed, "Random seed")->default_val(42);
}

double parse_real(const std::string& text, const char* what) {
  if (text == "inf" || text == "Inf") return kInfinity;
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidArgument, fmt::format("{}: cannot parse '{}'", what, text));
}

WeightPower power_of(const Common& c) {
  auto q = parse_weight_power(c.q);
  if (!q) throw Error(ErrorCode::InvalidArgument, fmt::format("--q: '{}' is not one of 1, 2, 4, 8, inf", c.q));
  return *q;
}

std::optional<WeightSpec> spec_of(const Common& c) {
  WeightPower q = power_of(c);
  if (!c.k1.empty()) {
    double k1 = parse_real(c.k1, "--k1");
    if (std::isinf(k1)) return WeightSpec::least_squares(q);
    return WeightSpec(k1, correction_k2(k1, q), q);
  }
  if (!c.k3.empty()) return calibrate(CalibrationTarget::k3(parse_real(c.k3, "--k3")), q);
  if (c.efficacy) return calibrate(CalibrationTarget::efficacy(*c.efficacy), q);
  return std::nullopt;
}

Dataset read_input(const Common& c) {
  if (c.input.empty()) throw Error(ErrorCode::InvalidArgument, "--input is required");
  return load_csv(c.input, c.header);
}

void write_out(const Common& c, const ResultDocument& doc) {
  if (c.out.empty()) return;
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, fmt::format("cannot write '{}'", c.out));
  f << doc.serialize();
}

std::string num(double v, int decimals = 6) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.{}f}", v + 0.0, decimals);  // + 0.0 folds -0 into 0
}

void describe_spec(ResultDocument& doc, const WeightSpec& spec) {
  doc.set("q", std::string(to_string(spec.q())));
  doc.set("k1", spec.k1());
  doc.set("k2", spec.k2());
  doc.set("k3", spec.k3());
}

// --- locscale ---------------------------------------------------------------

struct LocscaleArgs {
  Common c;
  std::size_t column = 1;
  int max_iter = 500;
};

int run_locscale(const LocscaleArgs& a) {
  Dataset ds = read_input(a.c);
  if (a.column < 1 || a.column > ds.matrix.cols()) {
    throw Error(ErrorCode::InvalidArgument, "--column out of range");
  }
  std::vector<double> xs = ds.matrix.column(a.column - 1);
  WeightSpec spec = spec_of(a.c).value_or(WeightSpec::least_squares(power_of(a.c)));
  LocationScaleEstimate est = estimate(xs, spec, a.c.tol > 0 ? a.c.tol : 1e-10, a.max_iter);
  fmt::print("n={} s={} sigma2={} N={} iterations={}\n", num(est.n), num(est.s_x),
             num(est.sigma2_hat), num(est.n_eff), est.iterations);
  ResultDocument doc;
  describe_spec(doc, spec);
  doc.set("n", est.n);
  doc.set("s", est.s_x);
  doc.set("sigma2_hat", est.sigma2_hat);
  doc.set("n_eff", est.n_eff);
  doc.set("iterations", static_cast<double>(est.iterations));
  doc.set("weights", est.weights);
  write_out(a.c, doc);
  return 0;
}

// --- regress ----------------------------------------------------------------

struct RegressArgs {
  Common c;
  std::string variances;
  bool intercept = false;
  int max_iter = 500;
};

int run_regress(const RegressArgs& a) {
  Dataset ds = read_input(a.c);
  const Matrix& m = ds.matrix;
  if (m.cols() < 2 && !a.intercept) {
    throw Error(ErrorCode::InvalidArgument, "regress: need design columns followed by the response");
  }
  const std::size_t n = m.rows();
  const std::size_t p = m.cols() - 1 + (a.intercept ? 1 : 0);
  RegressionProblem prob;
  prob.D = Matrix(n, p);
  prob.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = 0;
    if (a.intercept) prob.D(i, k++) = 1.0;
    for (std::size_t j = 0; j + 1 < m.cols(); ++j) prob.D(i, k++) = m(i, j);
    prob.y[i] = m(i, m.cols() - 1);
  }
  if (!a.variances.empty()) prob.S = load_csv(a.variances, false).matrix;
  WeightSpec spec = spec_of(a.c).value_or(WeightSpec::least_squares(power_of(a.c)));
  RegressionEstimate est = robust_gls(prob, spec, a.c.tol > 0 ? a.c.tol : 1e-10, a.max_iter);

  fmt::print("beta");
  for (double b : est.beta) fmt::print("\t{}", num(b));
  fmt::print("\ns={} N={} iterations={}\n", num(est.s), num(est.n_eff), est.iterations);
  if (!est.cov_beta.empty()) fmt::print("cov\n{}", format_matrix(est.cov_beta, 6));

  ResultDocument doc;
  describe_spec(doc, spec);
  doc.set("beta", est.beta);
  doc.set("s", est.s);
  doc.set("n_eff", est.n_eff);
  doc.set("iterations", static_cast<double>(est.iterations));
  doc.set("weights", est.weights);
  if (!est.cov_beta.empty()) doc.set("cov_beta", est.cov_beta);
  write_out(a.c, doc);
  return 0;
}

// --- tsvd -------------------------------------------------------------------

struct TsvdArgs {
  Common c;
  std::size_t rank = 1;
  bool total = false;
  bool robust = false;
  int continuation_steps = 11;
  bool standardize = false;
  bool ddof1 = false;
  std::string preset;
  int max_outer = 200;
};

TsvdConfig config_of(const TsvdArgs& a) {
  TsvdConfig cfg;
  cfg.rank = a.rank;
  auto spec = spec_of(a.c);
  if (!spec && a.robust) spec = calibrate(CalibrationTarget::k3(1.0), power_of(a.c));
  cfg.spec = spec.value_or(WeightSpec::least_squares(power_of(a.c)));
  cfg.total = a.total;
  cfg.continuation = default_continuation(a.continuation_steps);
  if (a.c.tol > 0) cfg.tol = a.c.tol;
  cfg.max_outer = a.max_outer;
  cfg.seed = a.c.seed;
  return cfg;
}

std::string european_path(const TsvdArgs& a) {
  if (!a.c.input.empty()) return a.c.input;
  if (const char* env = std::getenv("ROBSVD_EUROPEAN")) return env;
  return "data/european.csv";
}

int run_european(const TsvdArgs& a) {
  std::string path = european_path(a);
  if (!std::ifstream(path)) {
    fmt::print(stderr,
               "note: european preset needs the 16x9 health and fertility table; none found at "
               "'{}' (pass --input or set ROBSVD_EUROPEAN)\n",
               path);
    return 0;
  }
  Dataset ds = standardize(load_csv(path, a.c.header), a.ddof1);
  fmt::print("method\trank\tsingular values\n");
  ResultDocument doc;
  auto report = [&](const std::string& label, const TsvdConfig& cfg) {
    TsvdResult r = total_svd(ds.matrix, cfg);
    fmt::print("{}\t{}", label, cfg.rank);
    for (double l : r.singular_values.values()) fmt::print("\t{}", num(l, 4));
    fmt::print("\n");
    doc.set(fmt::format("{} rank {}", label, cfg.rank), r.singular_values.values());
  };
  for (std::size_t p = 1; p <= 3; ++p) {
    TsvdConfig cfg = config_of(a);
    cfg.rank = p;
    cfg.spec = WeightSpec::least_squares();
    cfg.total = false;
    report("ordinary", cfg);
    for (double k3 : {kInfinity, 2.0, 1.0, 0.5}) {
      cfg.total = true;
      cfg.spec = std::isinf(k3) ? WeightSpec::least_squares()
                                : calibrate(CalibrationTarget::k3(k3), WeightPower::Four);
      report(std::isinf(k3) ? "total k3=inf" : fmt::format("total k3={}", k3), cfg);
    }
  }
  write_out(a.c, doc);
  return 0;
}

int run_tsvd(const TsvdArgs& a) {
  if (!a.preset.empty()) {
    if (a.preset != "european") {
      throw Error(ErrorCode::InvalidArgument, fmt::format("unknown preset '{}'", a.preset));
    }
    return run_european(a);
  }
  Dataset ds = read_input(a.c);
  if (a.standardize) ds = standardize(ds, a.ddof1);
  TsvdConfig cfg = config_of(a);
  TsvdResult r = total_svd(ds.matrix, cfg);

  fmt::print("approximation\n{}", format_matrix(r.approximation, 4));
  fmt::print("singular values");
  for (double l : r.singular_values.values()) fmt::print("\t{}", num(l, 4));
  fmt::print("\ns={} outer_iterations={}\n", num(r.state.s), r.outer_iterations);
  if (cfg.spec.robust()) fmt::print("weights\n{}", format_matrix(r.state.W, 4));

  ResultDocument doc;
  describe_spec(doc, cfg.spec);
  doc.set("rank", static_cast<double>(cfg.rank));
  doc.set("total", cfg.total ? 1.0 : 0.0);
  doc.set("s", r.state.s);
  doc.set("nu", r.state.nu);
  doc.set("outer_iterations", static_cast<double>(r.outer_iterations));
  doc.set("singular_values", r.singular_values.values());
  doc.set("approximation", r.approximation);
  doc.set("A", r.state.A);
  doc.set("B", r.state.B);
  doc.set("var_A", r.state.var_A);
  doc.set("var_B", r.state.var_B);
  doc.set("weights", r.state.W);
  doc.set("U", r.U);
  doc.set("V", r.V);
  write_out(a.c, doc);
  return 0;
}

// --- calibrate --------------------------------------------------------------

int run_calibrate(const Common& c) {
  auto spec = spec_of(c);
  if (!spec) throw Error(ErrorCode::InvalidArgument, "calibrate: give one of --efficacy, --k3, --k1");
  double e = efficacy(spec->k1(), spec->q());
  fmt::print("k1={} k2={} k3={} efficacy={}\n", num(spec->k1(), 4), num(spec->k2(), 4),
             num(spec->k3(), 4), num(e, 4));
  ResultDocument doc;
  describe_spec(doc, *spec);
  doc.set("efficacy", e);
  write_out(c, doc);
  return 0;
}

// --- breakdown --------------------------------------------------------------

struct BreakdownArgs {
  Common c;
  std::vector<std::size_t> sizes{100, 300, 900};
  double a = 1.0;
};

int run_breakdown(const BreakdownArgs& b) {
  auto spec = spec_of(b.c);
  if (!spec) throw Error(ErrorCode::InvalidArgument, "breakdown: give one of --efficacy, --k3, --k1");
  ResultDocument doc;
  describe_spec(doc, *spec);
  std::vector<double> values;
  for (std::size_t m : b.sizes) {
    BreakdownResult r = breakdown_point(*spec, m, b.a);
    fmt::print("m={}\tk*={}\tbp={}\n", m, num(r.k_star, 4), num(r.bp, 4));
    values.push_back(r.bp);
  }
  doc.set("bp", values);
  if (values.size() == 3) {
    std::array<std::pair<double, double>, 3> points;
    for (std::size_t i = 0; i < 3; ++i) points[i] = {static_cast<double>(b.sizes[i]), values[i]};
    try {
      AsymptoteFit fit = extrapolate(points);
      fmt::print("m=inf\tbp={}\n", num(fit.t_inf, 4));
      doc.set("bp_inf", fit.t_inf);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularFit) throw;
      fmt::print("m=inf\tbp={}\t(not monotone in m; largest m shown)\n", num(values.back(), 4));
      doc.set("bp_inf", values.back());
    }
  }
  write_out(b.c, doc);
  return 0;
}

// --- tables -----------------------------------------------------------------

struct TablesArgs {
  Common c;
  std::string which = "all";
};

int run_tables(const TablesArgs& t) {
  ResultDocument doc;
  if (t.which == "1" || t.which == "all") {
    const double effs[] = {0.80, 0.90, 0.95};
    fmt::print("Table 1: breakdown point by weight power\nefficacy\tq\tk1\tBP1\n");
    std::vector<double> bps;
    for (const PowerTableCell& cell : power_table(effs, kAllPowers)) {
      fmt::print("{:.2f}\t{}\t{}\t{}\n", cell.efficacy, to_string(cell.q), num(cell.spec.k1(), 4),
                 num(cell.bp1.limit, 3));
      bps.push_back(cell.bp1.limit);
    }
    doc.set("table1_bp1", bps);
  }
  if (t.which == "2" || t.which == "all") {
    if (t.which == "all") fmt::print("\n");
    fmt::print("Table 2: calibration and dynamics (q = 4)\nefficacy\tk1\tk2\tk3\tBP1\tb_n\tb_s\n");
    auto rows = calibration_table(kTableEfficacies, kTableK3);
    Matrix m(rows.size(), 7);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const CalibrationRow& r = rows[i];
      fmt::print("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", num(r.efficacy, 4), num(r.k1, 4), num(r.k2, 4),
                 num(r.k3, 4), num(r.bp1, 4), num(r.b_n, 4), num(r.b_s, 4));
      // the least-squares row stores k1 = k3 = 0 in the matrix form
      double row[7] = {r.efficacy, std::isinf(r.k1) ? 0.0 : r.k1, r.k2, std::isinf(r.k3) ? 0.0 : r.k3,
                       r.bp1, r.b_n, r.b_s};
      for (std::size_t j = 0; j < 7; ++j) m(i, j) = row[j];
    }
    doc.set("table2", m);
  }
  if (t.which == "3") {
    TsvdArgs a;
    a.c = t.c;
    a.preset = "european";
    return run_european(a);
  }
  if (t.which != "1" && t.which != "2" && t.which != "all") {
    throw Error(ErrorCode::InvalidArgument, fmt::format("unknown table '{}'", t.which));
  }
  write_out(t.c, doc);
  return 0;
}

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Input: return 2;
    case ErrorCategory::Numerical: return 3;
    case ErrorCategory::Convergence: return 4;
  }
  return 3;
}

std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Input: return "input";
    case ErrorCategory::Numerical: return "numerical";
    case ErrorCategory::Convergence: return "convergence";
  }
  return "numerical";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust weighted location-scale, regression and total SVD"};
  app.require_subcommand(1);

  LocscaleArgs loc;
  auto* cmd_loc = app.add_subcommand("locscale", "Weighted location and scale of one column");
  add_common(cmd_loc, loc.c);
  cmd_loc->add_option("--column", loc.column, "1-based column to use")->default_val(1);
  cmd_loc->add_option("--max-iter", loc.max_iter)->default_val(500);

  RegressArgs reg;
  auto* cmd_reg = app.add_subcommand("regress", "Robust generalised least squares");
  add_common(cmd_reg, reg.c);
  cmd_reg->add_option("--variances", reg.variances, "CSV of per-row design variances (n x p)");
  cmd_reg->add_flag("--intercept", reg.intercept, "Prepend a column of ones to the design");
  cmd_reg->add_option("--max-iter", reg.max_iter)->default_val(500);

  TsvdArgs ts;
  auto* cmd_ts = app.add_subcommand("tsvd", "Robust and total low-rank approximation");
  add_common(cmd_ts, ts.c);
  cmd_ts->add_option("--rank", ts.rank, "Rank p")->default_val(1);
  cmd_ts->add_flag("--total", ts.total, "Include factor variances");
  cmd_ts->add_flag("--robust", ts.robust, "Robust weights (k3 = 1 unless given)");
  cmd_ts->add_option("--continuation-steps", ts.continuation_steps, "Points on the t schedule from 0 to 1")->default_val(11);
  cmd_ts->add_flag("--standardize", ts.standardize, "Centre and scale columns first");
  cmd_ts->add_flag("--ddof1", ts.ddof1, "Standardize with divisor m - 1");
  cmd_ts->add_option("--preset", ts.preset, "Named experiment (european)");
  cmd_ts->add_option("--max-outer", ts.max_outer, "Outer cycles allowed per continuation stage")->default_val(200);

  Common cal;
  auto* cmd_cal = app.add_subcommand("calibrate", "Solve for k1, k2, k3");
  add_common(cmd_cal, cal, false);

  BreakdownArgs bd;
  auto* cmd_bd = app.add_subcommand("breakdown", "Breakdown point on contaminated Gaussian samples");
  add_common(cmd_bd, bd.c, false);
  cmd_bd->add_option("--m", bd.sizes, "Sample sizes")->delimiter(',');
  cmd_bd->add_option("--a", bd.a, "Offset threshold")->default_val(1.0);

  TablesArgs tb;
  auto* cmd_tb = app.add_subcommand("tables", "Regenerate the calibration and breakdown tables");
  add_common(cmd_tb, tb.c);
  cmd_tb->add_option("--table", tb.which, "1, 2, 3 or all")->default_val("all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error category=input code=UsageError stage=cli message=\"" << e.what() << "\"\n";
    return 2;
  }

  std::string stage = app.get_subcommands().front()->get_name();
  try {
    if (*cmd_loc) return run_locscale(loc);
    if (*cmd_reg) return run_regress(reg);
    if (*cmd_ts) return run_tsvd(ts);
    if (*cmd_cal) return run_calibrate(cal);
    if (*cmd_bd) return run_breakdown(bd);
    if (*cmd_tb) return run_tables(tb);
  } catch (const Error& e) {
    std::cerr << fmt::format("error category={} code={} stage={} message=\"{}\"\n",
                             category_name(e.category()), to_string(e.code()), stage, e.what());
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << fmt::format("error category=numerical code=Internal stage={} message=\"{}\"\n",
                             stage, e.what());
    return 3;
  }
  return 0;
}
