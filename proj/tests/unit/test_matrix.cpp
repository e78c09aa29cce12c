#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <random>

#include "robsvd/error.hpp"
#include "robsvd/matrix.hpp"

using namespace robsvd;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Matrix m(r, c);
  for (double& v : m.data()) v = nd(gen);
  return m;
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

double max_dev_from_identity(const Matrix& q) {
  Matrix g = transposed_multiply(q, q);
  double dev = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j)
      dev = std::max(dev, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return dev;
}

}  // namespace

TEST(Matrix, RejectsNonFiniteAndBadShapes) {
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), Error);
  EXPECT_THROW(Matrix(1, 2, std::vector<double>{1, NAN}), Error);
  try {
    (void)Matrix::from_rows({{1, 2}, {3}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RaggedRows);
  }
}

TEST(Matrix, ProductsAgreeWithEigen) {
  Matrix a = random_matrix(4, 3, 1), b = random_matrix(3, 5, 2), c = random_matrix(6, 3, 3);
  Eigen::MatrixXd ab = to_eigen(a) * to_eigen(b);
  Eigen::MatrixXd act = to_eigen(a) * to_eigen(c).transpose();
  Eigen::MatrixXd ata = to_eigen(a).transpose() * to_eigen(a);
  EXPECT_LT((to_eigen(a * b) - ab).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((to_eigen(multiply_transposed(a, c)) - act).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((to_eigen(transposed_multiply(a, a)) - ata).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Matrix, InverseAgreesWithEigenAndRejectsSingular) {
  Matrix a = random_matrix(4, 4, 7);
  Eigen::MatrixXd inv = to_eigen(a).inverse();
  EXPECT_LT((to_eigen(inverse(a)) - inv).cwiseAbs().maxCoeff(), 1e-10);
  Matrix s = Matrix::from_rows({{1, 2}, {2, 4}});
  try {
    (void)inverse(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularNormalMatrix);
  }
}

TEST(Orthonormalize, TrivialCases) {
  Matrix id = Matrix::from_rows({{1, 0}, {0, 1}, {0, 0}});
  EXPECT_EQ(orthonormalize(id), id);
  Matrix scaled = Matrix::from_rows({{2, 0}, {0, 3}, {0, 0}});
  EXPECT_LT(max_abs(orthonormalize(scaled) - id), 1e-15);
}

TEST(Orthonormalize, IdentitiesOnRandomInput) {
  Matrix m = random_matrix(5, 2, 11);
  Matrix q = orthonormalize(m);
  EXPECT_LT(max_dev_from_identity(q), 1e-12);
  // QQ'M = M: the span is preserved
  Matrix proj = q * transposed_multiply(q, m);
  EXPECT_LT(max_abs(proj - m), 1e-12);
  for (std::size_t k = 0; k < q.cols(); ++k) {
    auto col = q.column(k);
    auto first = std::find_if(col.begin(), col.end(), [](double v) { return v != 0.0; });
    EXPECT_GT(*first, 0.0);
  }
  EXPECT_LT(max_abs(orthonormalize(q) - q), 1e-12);
}

TEST(Orthonormalize, RankDeficient) {
  Matrix m = Matrix::from_rows({{1, 2}, {2, 4}, {3, 6}});
  try {
    (void)orthonormalize(m);
    FAIL();
  } catch (const IndexedError& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
    EXPECT_EQ(e.index(), 1u);
  }
}

TEST(ClassicalSvd, DiagonalAndRankOne) {
  auto d = classical_svd(Matrix::from_rows({{3, 0}, {0, 2}}));
  EXPECT_NEAR(d.singular_values[0], 3.0, 1e-14);
  EXPECT_NEAR(d.singular_values[1], 2.0, 1e-14);

  // |u| = 2, |v| = 5
  Matrix u = Matrix::from_rows({{2}, {0}, {0}});
  Matrix v = Matrix::from_rows({{3}, {4}});
  auto r1 = classical_svd(multiply_transposed(u, v));
  EXPECT_NEAR(r1.singular_values[0], 10.0, 1e-12);
  EXPECT_NEAR(r1.singular_values[1], 0.0, 1e-12);
}

TEST(ClassicalSvd, MatchesEigenAndReconstructs) {
  for (auto [r, c] : {std::pair{6, 4}, std::pair{4, 6}, std::pair{5, 5}}) {
    Matrix m = random_matrix(r, c, 100 + r * 10 + c);
    auto svd = classical_svd(m);
    Eigen::JacobiSVD<Eigen::MatrixXd> ref(to_eigen(m));
    for (std::size_t k = 0; k < svd.singular_values.size(); ++k)
      EXPECT_NEAR(svd.singular_values[k], ref.singularValues()(k), 1e-12);
    EXPECT_LT(max_abs(reconstruct(svd) - m), kReconstructionTolerance * max_abs(m));
    EXPECT_LT(max_dev_from_identity(svd.u), 1e-12);
    EXPECT_LT(max_dev_from_identity(svd.v), 1e-12);
  }
}

TEST(ClassicalSvd, SquaredValuesAreEigenvaluesOfGram) {
  // 2x2 Gram matrix: roots of the characteristic polynomial in closed form
  Matrix m = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
  Matrix g = transposed_multiply(m, m);
  double tr = g(0, 0) + g(1, 1), det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
  double disc = std::sqrt(tr * tr / 4 - det);
  auto svd = classical_svd(m);
  EXPECT_NEAR(svd.singular_values[0] * svd.singular_values[0], tr / 2 + disc, 1e-10);
  EXPECT_NEAR(svd.singular_values[1] * svd.singular_values[1], tr / 2 - disc, 1e-10);
}

TEST(ClassicalSvd, InvariantUnderPermutation) {
  Matrix m = random_matrix(5, 4, 21);
  Matrix p(5, 4);
  const int rows[] = {3, 0, 4, 1, 2}, cols[] = {2, 3, 0, 1};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 4; ++j) p(i, j) = m(rows[i], cols[j]);
  auto a = classical_svd(m), b = classical_svd(p);
  for (std::size_t k = 0; k < 4; ++k)
    EXPECT_NEAR(a.singular_values[k], b.singular_values[k], 1e-10 * a.singular_values[0]);
}

TEST(ClassicalSvd, EckartYoungBeatsRandomSearch) {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> ints(-5, 5);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 5; ++trial) {
    Matrix m(4, 3);
    for (double& v : m.data()) v = ints(gen);
    auto svd = classical_svd(m);
    double best_svd = frobenius_norm(m - truncate(svd, 1));
    double best_search = INFINITY;
    for (int s = 0; s < 10000; ++s) {
      Matrix u(4, 1), v(3, 1);
      for (double& x : u.data()) x = nd(gen);
      // for a fixed direction u the optimal v is the projection
      double uu = dot(u.data(), u.data());
      Matrix vt = transposed_multiply(m, u);
      for (double& x : vt.data()) x /= uu;
      v = vt;
      best_search = std::min(best_search, frobenius_norm(m - multiply_transposed(u, v)));
    }
    EXPECT_LE(best_svd, best_search + 1e-12);
  }
}

TEST(ClassicalSvd, TruncationIsEckartYoungOptimum) {
  Matrix m = random_matrix(6, 4, 9);
  auto svd = classical_svd(m);
  double tail = 0.0;
  for (std::size_t k = 2; k < 4; ++k) tail += svd.singular_values[k] * svd.singular_values[k];
  EXPECT_NEAR(frobenius_norm(m - truncate(svd, 2)), std::sqrt(tail), 1e-12);
}
