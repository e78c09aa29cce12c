#include <gtest/gtest.h>

#include <random>

#include "robsvd/error.hpp"
#include "robsvd/regress.hpp"
#include "robsvd/total_svd.hpp"

using namespace robsvd;

namespace {

Matrix example53() {
  return Matrix::from_rows({{0.908, 2.003, 2.983},
                            {2.048, 4.006, 5.992},
                            {3.026, 5.996, 8.936},
                            {4.008, 7.998, 12.09},
                            {5.017, 9.997, 0}});
}

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Matrix m(r, c);
  for (double& v : m.data()) v = nd(gen);
  return m;
}

WeightSpec spec_k3(double v) { return calibrate(CalibrationTarget::k3(v), WeightPower::Four); }

double max_dev_from_identity(const Matrix& q) {
  Matrix g = transposed_multiply(q, q);
  double dev = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j)
      dev = std::max(dev, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return dev;
}

}  // namespace

TEST(DegreesOfFreedom, Formula) {
  EXPECT_DOUBLE_EQ(degrees_of_freedom(5, 3, 1), 7.0);
  EXPECT_DOUBLE_EQ(degrees_of_freedom(16, 9, 2), 47.0);
}

TEST(Baseline, ExactRankOne) {
  Matrix u = Matrix::from_rows({{1}, {2}, {3}, {4}});
  Matrix v = Matrix::from_rows({{2}, {-1}, {0.5}});
  Matrix x = multiply_transposed(u, v);
  auto r = baseline_alternating_svd(x, 1);
  EXPECT_LT(frobenius_norm(x - multiply_transposed(r.A, r.B)), 1e-10);
  double un = std::sqrt(30.0);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(r.A(i, 0), u(i, 0) / un, 1e-10);
}

TEST(Baseline, MatchesEckartYoung) {
  Matrix x = random_matrix(6, 4, 17);
  auto r = baseline_alternating_svd(x, 2, 1e-13);
  double ey = frobenius_norm(x - truncate(classical_svd(x), 2));
  double got = frobenius_norm(x - multiply_transposed(r.A, r.B));
  EXPECT_NEAR(got, ey, 1e-8 * ey);
  EXPECT_LT(max_dev_from_identity(r.A), 1e-12);
}

TEST(Baseline, ResidualNonIncreasing) {
  Matrix x = random_matrix(7, 5, 3);
  auto r = baseline_alternating_svd(x, 2);
  ASSERT_GT(r.residuals.size(), 2u);
  for (std::size_t i = 1; i < r.residuals.size(); ++i)
    EXPECT_LE(r.residuals[i], r.residuals[i - 1] * (1 + 1e-12) + 1e-14);
}

TEST(Baseline, Deterministic) {
  Matrix x = random_matrix(5, 4, 3);
  auto a = baseline_alternating_svd(x, 2, 1e-10, 7);
  auto b = baseline_alternating_svd(x, 2, 1e-10, 7);
  EXPECT_EQ(a.A, b.A);
  EXPECT_EQ(a.B, b.B);
}

TEST(Baseline, WorkedExampleRowFive) {
  Matrix x = example53();
  auto r = baseline_alternating_svd(x, 1);
  Matrix ab = multiply_transposed(r.A, r.B);
  EXPECT_NEAR(ab(4, 0), 2.536, 0.01);
  EXPECT_NEAR(ab(4, 1), 5.053, 0.01);
  EXPECT_NEAR(ab(4, 2), 5.592, 0.01);
}

TEST(EvaluateWeights, ExactFitAndDofExhausted) {
  Matrix a = Matrix::from_rows({{0.6}, {0.8}, {0.0}});
  Matrix b = Matrix::from_rows({{5}, {10}});
  Matrix x = multiply_transposed(a, b);
  auto ev = evaluate_weights(x, a, b, spec_k3(1.0), 0.0);
  EXPECT_EQ(ev.s, 0.0);
  for (double w : ev.W.data()) EXPECT_EQ(w, 1.0);

  Matrix x2 = random_matrix(3, 3, 1);
  auto base = baseline_alternating_svd(x2, 2);
  try {
    (void)evaluate_weights(x2, base.A, base.B, spec_k3(1.0), 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DoFExhausted);
  }
}

TEST(EvaluateWeights, ScaleEquation) {
  Matrix x = example53();
  auto base = baseline_alternating_svd(x, 1);
  WeightSpec spec = spec_k3(1.0);
  auto ev = evaluate_weights(x, base.A, base.B, spec, 0.0);
  Matrix f = x - multiply_transposed(base.A, base.B);
  double sw = 0, sw2 = 0, swf = 0;
  for (std::size_t k = 0; k < f.data().size(); ++k) {
    double w = ev.W.data()[k];
    EXPECT_NEAR(w, weight(f.data()[k] / (spec.k3() * ev.s), WeightPower::Four), 1e-9);
    sw2 += w * w;
    sw += w;
    swf += w * w * f.data()[k] * f.data()[k];
  }
  double n = sw * sw / sw2;
  EXPECT_NEAR(ev.n_eff, n, 1e-9);
  EXPECT_NEAR(ev.s * ev.s, n / (n - ev.nu) * swf / sw2, 1e-8 * ev.s * ev.s);
}

TEST(BStep, PicksFirstRowForBasisVector) {
  Matrix x = example53();
  Matrix a(5, 1);
  a(0, 0) = 1.0;
  Matrix w(5, 3, 1.0);
  auto step = estimate_B_step(x, a, Matrix(5, 1), w, WeightSpec::least_squares(), 1.0, false);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(step.factor(j, 0), x(0, j), 1e-15);
}

TEST(BStep, MatchesColumnwiseRegression) {
  Matrix x = random_matrix(6, 4, 41);
  Matrix a = orthonormalize(random_matrix(6, 2, 42));
  Matrix w(6, 4, 1.0);
  auto step = estimate_B_step(x, a, Matrix(6, 2), w, WeightSpec::least_squares(), 1.0, true);
  for (std::size_t j = 0; j < 4; ++j) {
    RegressionProblem prob{x.column(j), a, {}};
    auto est = robust_gls(prob, WeightSpec::least_squares());
    for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(step.factor(j, k), est.beta[k], 1e-10);
  }
}

TEST(AStep, OrthonormalAndTransposeDual) {
  Matrix x = random_matrix(4, 3, 5);
  Matrix b = random_matrix(3, 2, 6);
  Matrix var_b(3, 2, 0.01);
  Matrix w = Matrix(4, 3, 1.0);
  for (std::size_t i = 0; i < 4; ++i) w(i, i % 3) = 0.7;
  WeightSpec spec = spec_k3(1.5);
  auto a_step = estimate_A_step(x, b, var_b, w, spec, 1.0, true);
  EXPECT_LT(max_dev_from_identity(a_step.factor), 1e-12);
  auto b_step = estimate_B_step(x.transposed(), b, var_b, w.transposed(), spec, 1.0, true);
  EXPECT_LT(max_abs(a_step.raw - b_step.factor), 1e-12);
  EXPECT_LT(max_abs(a_step.variances - b_step.variances), 1e-12);
  for (double v : a_step.variances.data()) EXPECT_GE(v, 0.0);
}

TEST(RegressionWeights, WorkedExamplePattern) {
  Matrix x = example53();
  auto base = baseline_alternating_svd(x, 1);
  Matrix wb = column_regression_weights(x, base.A, spec_k3(1.5));
  for (std::size_t j = 0; j < 3; ++j) EXPECT_LT(wb(4, j), 0.05);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_GT(wb(i, j), 0.9);
  Matrix wa = row_regression_weights(x, base.B, spec_k3(1.5));
  EXPECT_NEAR(wa(0, 2), 0.869, 0.02);
}

TEST(TotalSvd, ExactRankOneAnyMode) {
  Matrix x = multiply_transposed(Matrix::from_rows({{1}, {2}, {3}, {4}}),
                                 Matrix::from_rows({{1}, {-1}, {2}}));
  for (bool total : {false, true}) {
    for (WeightSpec spec : {WeightSpec::least_squares(), spec_k3(1.0)}) {
      TsvdConfig cfg;
      cfg.total = total;
      cfg.spec = spec;
      auto r = total_svd(x, cfg);
      EXPECT_LT(max_abs(r.approximation - x), 1e-9);
      EXPECT_LT(r.state.s, 1e-9);
      for (double w : r.state.W.data()) EXPECT_NEAR(w, 1.0, 1e-12);
    }
  }
}

TEST(TotalSvd, ResultInvariants) {
  Matrix x = example53();
  TsvdConfig cfg;
  cfg.total = true;
  cfg.spec = spec_k3(1.0);
  auto r = total_svd(x, cfg);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(max_dev_from_identity(r.state.A), 1e-8);
  for (double w : r.state.W.data()) {
    EXPECT_GT(w, 0.0);
    EXPECT_LE(w, 1.0);
  }
  for (double v : r.state.var_A.data()) EXPECT_GE(v, 0.0);
  for (double v : r.state.var_B.data()) EXPECT_GE(v, 0.0);
  EXPECT_DOUBLE_EQ(r.state.nu, 7.0);
  Matrix usv = r.U;
  for (std::size_t k = 0; k < usv.cols(); ++k)
    for (std::size_t i = 0; i < usv.rows(); ++i) usv(i, k) *= r.singular_values[k];
  EXPECT_LT(max_abs(multiply_transposed(usv, r.V) - r.approximation), 1e-8 * max_abs(r.approximation));
  EXPECT_EQ(r.stages.front(), 0.0);
  EXPECT_EQ(r.stages.back(), 1.0);
}

TEST(TotalSvd, OneMoreCycleIsStill) {
  Matrix x = example53();
  TsvdConfig cfg;
  cfg.spec = spec_k3(1.0);
  auto r = total_svd(x, cfg);
  auto ev = evaluate_weights(x, r.state.A, r.state.B, cfg.spec, r.state.s);
  auto bs = estimate_B_step(x, r.state.A, r.state.var_A, ev.W, cfg.spec, 0.0, false);
  auto as = estimate_A_step(x, bs.factor, bs.variances, ev.W, cfg.spec, 0.0, false);
  Matrix ab = multiply_transposed(r.state.A, bs.factor);
  EXPECT_LT(max_abs(ab - r.approximation), 10 * cfg.tol * max_abs(r.approximation));
  EXPECT_LT(max_abs(as.factor * transposed_multiply(as.factor, r.state.A) - r.state.A), 10 * cfg.tol);
}

TEST(TotalSvd, ZeroContinuationEndpointIsOrdinaryFixedPoint) {
  Matrix x = example53();
  TsvdConfig cfg;
  cfg.spec = spec_k3(1.0);
  auto ord = total_svd(x, cfg);
  // one cycle of the total machinery at t = 0 leaves the ordinary fixed point in place
  auto ev = evaluate_weights(x, ord.state.A, ord.state.B, cfg.spec, ord.state.s, nullptr);
  auto bs = estimate_B_step(x, ord.state.A, ord.state.var_A, ev.W, cfg.spec, 0.0, true);
  auto as = estimate_A_step(x, bs.factor, bs.variances, ev.W, cfg.spec, 0.0, true);
  Matrix ab = multiply_transposed(ord.state.A, bs.factor);
  EXPECT_LT(max_abs(ab - ord.approximation), 10 * cfg.tol * max_abs(ord.approximation));
  EXPECT_LT(max_abs(as.factor - ord.state.A), 10 * cfg.tol);
  for (double v : bs.variances.data()) EXPECT_GT(v, 0.0);
}

TEST(TotalSvd, PermutationEquivariance) {
  Matrix x = example53();
  const std::size_t rows[] = {2, 4, 0, 3, 1}, cols[] = {1, 2, 0};
  Matrix px(5, 3);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) px(i, j) = x(rows[i], cols[j]);
  TsvdConfig cfg;
  cfg.total = true;
  cfg.spec = spec_k3(1.0);
  auto a = total_svd(x, cfg), b = total_svd(px, cfg);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_NEAR(b.approximation(i, j), a.approximation(rows[i], cols[j]), 1e-6);
      EXPECT_NEAR(b.state.W(i, j), a.state.W(rows[i], cols[j]), 1e-6);
    }
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(b.state.var_A(i, 0), a.state.var_A(rows[i], 0), 1e-6);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(b.state.var_B(j, 0), a.state.var_B(cols[j], 0), 1e-6);
}

TEST(TotalSvd, FixedPointMinimizesObjectiveForItsVariances) {
  Matrix x = Matrix::from_rows({{1.0, 2.1}, {2.2, 3.9}, {2.9, 6.3}});
  TsvdConfig cfg;
  cfg.total = true;
  auto r = total_svd(x, cfg);
  const Matrix& va = r.state.var_A;
  const Matrix& vb = r.state.var_B;
  double at_fixed = total_objective(x, r.state.A, r.state.B, va, vb);

  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  auto normalize = [](Matrix& a) {
    double n = norm2(a.data());
    for (double& v : a.data()) v /= n;
  };
  Matrix best_a, best_b;
  double best = INFINITY;
  for (int s = 0; s < 100000; ++s) {
    Matrix a(3, 1), b(2, 1);
    for (double& v : a.data()) v = nd(gen);
    normalize(a);
    for (double& v : b.data()) v = 8.0 * nd(gen);
    double f = total_objective(x, a, b, va, vb);
    if (f < best) {
      best = f;
      best_a = a;
      best_b = b;
    }
  }
  for (double step = 0.1; step > 1e-10;) {
    bool improved = false;
    for (int c = 0; c < 5; ++c)
      for (double d : {step, -step}) {
        Matrix a = best_a, b = best_b;
        (c < 3 ? a(c, 0) : b(c - 3, 0)) += d;
        normalize(a);
        double f = total_objective(x, a, b, va, vb);
        if (f < best) {
          best = f;
          best_a = a;
          best_b = b;
          improved = true;
        }
      }
    if (!improved) step /= 2;
  }
  EXPECT_LE(at_fixed, best * (1 + 1e-9));
}

TEST(TotalSvd, ConfigValidation) {
  Matrix x = example53();
  TsvdConfig cfg;
  cfg.rank = 4;
  EXPECT_THROW((void)total_svd(x, cfg), Error);
  cfg.rank = 1;
  cfg.total = true;
  cfg.continuation = {0.0, 0.5};
  EXPECT_THROW((void)total_svd(x, cfg), Error);
  cfg.continuation = {0.0, 0.5, 0.5, 1.0};
  EXPECT_THROW((void)total_svd(x, cfg), Error);
}

TEST(SingularValuesOf, FactorNorms) {
  Matrix a = Matrix::from_rows({{2}, {0}});
  Matrix b = Matrix::from_rows({{3}, {0}, {0}});
  EXPECT_NEAR(singular_values_of(a, b).singular_values[0], 6.0, 1e-14);
  Matrix q = Matrix::from_rows({{1, 0}, {0, 1}, {0, 0}});
  Matrix bb = Matrix::from_rows({{0, 2}, {4, 0}});
  auto svd = singular_values_of(q, bb);
  EXPECT_NEAR(svd.singular_values[0], 4.0, 1e-14);
  EXPECT_NEAR(svd.singular_values[1], 2.0, 1e-14);
}
