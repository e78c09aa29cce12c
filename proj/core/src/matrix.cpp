#include "robsvd/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "robsvd/error.hpp"

namespace robsvd {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::InvalidArgument, std::string(op) + ": shape mismatch");
  }
}

// Flip every column of `q` (and the matching column of `partner`, if any) so
// that its first entry that is not negligible is positive.
void apply_sign_convention(Matrix& q, Matrix* partner) {
  for (std::size_t j = 0; j < q.cols(); ++j) {
    double scale = 0.0;
    for (std::size_t i = 0; i < q.rows(); ++i) scale = std::max(scale, std::abs(q(i, j)));
    if (scale == 0.0) continue;
    for (std::size_t i = 0; i < q.rows(); ++i) {
      double v = q(i, j);
      if (std::abs(v) <= 1e-14 * scale) continue;
      if (v < 0.0) {
        for (std::size_t r = 0; r < q.rows(); ++r) q(r, j) = -q(r, j);
        if (partner != nullptr) {
          for (std::size_t r = 0; r < partner->rows(); ++r) (*partner)(r, j) = -(*partner)(r, j);
        }
      }
      break;
    }
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::InvalidArgument, "matrix: entry count does not match shape");
  }
  require_finite("matrix");
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  std::size_t r = rows.size();
  std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw Error(ErrorCode::RaggedRows, "matrix: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::column_vector(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

std::vector<double> Matrix::column(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

void Matrix::set_column(std::size_t j, std::span<const double> values) {
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Matrix::require_finite(const char* what) const {
  if (!all_finite()) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + ": non-finite entry");
  }
}

bool DiagonalMatrix::nonnegative() const noexcept {
  return std::all_of(diag_.begin(), diag_.end(), [](double v) { return v >= 0.0; });
}

Matrix DiagonalMatrix::to_dense() const {
  Matrix m(diag_.size(), diag_.size());
  for (std::size_t i = 0; i < diag_.size(); ++i) m(i, i) = diag_[i];
  return m;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::InvalidArgument, "multiply: shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] += bd[i];
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "subtract");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] -= bd[i];
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (double& v : c.data()) v *= s;
  return c;
}

Matrix multiply_transposed(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw Error(ErrorCode::InvalidArgument, "multiply_transposed: shape mismatch");
  }
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) c(i, j) = dot(a.row(i), b.row(j));
  return c;
}

Matrix transposed_multiply(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw Error(ErrorCode::InvalidArgument, "transposed_multiply: shape mismatch");
  }
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k)
    for (std::size_t i = 0; i < a.cols(); ++i) {
      double aki = a(k, i);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aki * b(k, j);
    }
  return c;
}

double max_abs(const Matrix& a) noexcept {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

double frobenius_norm(const Matrix& a) noexcept { return norm2(a.data()); }

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) noexcept {
  // scaled to avoid overflow on the 1e6 contamination experiments
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double v : a) s += (v / scale) * (v / scale);
  return scale * std::sqrt(s);
}

namespace {

double one_norm(const Matrix& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

// Gauss-Jordan; returns false on a vanishing pivot.
bool gauss_jordan(const Matrix& a, Matrix& inv) {
  std::size_t n = a.rows();
  Matrix work = a;
  inv = Matrix::identity(n);
  double scale = max_abs(a);
  if (scale == 0.0) return false;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(work(r, col)) > std::abs(work(piv, col))) piv = r;
    if (std::abs(work(piv, col)) <= 1e-300 + 1e-16 * scale) return false;
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(work(piv, j), work(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    }
    double d = work(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      work(col, j) /= d;
      inv(col, j) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = work(r, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        work(r, j) -= f * work(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return true;
}

}  // namespace

Matrix inverse(const Matrix& a, double max_condition) {
  if (a.rows() != a.cols() || a.empty()) {
    throw Error(ErrorCode::InvalidArgument, "inverse: matrix must be square and non-empty");
  }
  Matrix inv;
  if (!gauss_jordan(a, inv)) {
    throw Error(ErrorCode::SingularNormalMatrix, "inverse: singular matrix");
  }
  double cond = one_norm(a) * one_norm(inv);
  if (!(cond <= max_condition)) {
    throw Error(ErrorCode::SingularNormalMatrix,
                "inverse: condition number " + std::to_string(cond) + " too large");
  }
  return inv;
}

double condition_number(const Matrix& a) {
  if (a.rows() != a.cols() || a.empty()) {
    throw Error(ErrorCode::InvalidArgument, "condition_number: matrix must be square");
  }
  Matrix inv;
  if (!gauss_jordan(a, inv)) return INFINITY;
  return one_norm(a) * one_norm(inv);
}

Matrix orthonormalize(const Matrix& m) {
  if (m.rows() < m.cols() || m.cols() == 0) {
    throw Error(ErrorCode::RankDeficient, "orthonormalize: need rows >= cols >= 1");
  }
  m.require_finite("orthonormalize");
  Matrix q = m;
  std::vector<double> v(m.rows());
  for (std::size_t k = 0; k < m.cols(); ++k) {
    for (std::size_t i = 0; i < m.rows(); ++i) v[i] = m(i, k);
    double original = norm2(v);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < k; ++j) {
        double r = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) r += q(i, j) * v[i];
        for (std::size_t i = 0; i < m.rows(); ++i) v[i] -= r * q(i, j);
      }
    }
    double residual = norm2(v);
    if (original == 0.0 || residual < kRankTolerance * original) {
      throw IndexedError(ErrorCode::RankDeficient, k,
                         "orthonormalize: column " + std::to_string(k) + " is dependent");
    }
    for (std::size_t i = 0; i < m.rows(); ++i) q(i, k) = v[i] / residual;
  }
  apply_sign_convention(q, nullptr);
  return q;
}

namespace {

// Hestenes one-sided Jacobi on a tall (rows >= cols) matrix.
SvdResult jacobi_tall(const Matrix& m) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  Matrix u = m;
  Matrix v = Matrix::identity(cols);

  bool converged = cols < 2;
  for (int sweep = 0; sweep < 60 && !converged; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          alpha += u(i, p) * u(i, p);
          beta += u(i, q) * u(i, q);
          gamma += u(i, p) * u(i, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta)) continue;
        rotated = true;
        double zeta = (beta - alpha) / (2.0 * gamma);
        double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          double up = u(i, p), uq = u(i, q);
          u(i, p) = c * up - s * uq;
          u(i, q) = s * up + c * uq;
        }
        for (std::size_t i = 0; i < cols; ++i) {
          double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    converged = !rotated;
  }
  if (!converged) throw Error(ErrorCode::NoConvergence, "classical_svd: Jacobi sweeps exceeded 60");

  std::vector<double> sigma(cols);
  for (std::size_t j = 0; j < cols; ++j) sigma[j] = norm2(u.column(j));

  std::vector<std::size_t> order(cols);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

  double largest = cols ? sigma[order[0]] : 0.0;
  Matrix us(rows, cols), vs(cols, cols);
  std::vector<double> ls(cols);
  std::vector<bool> missing(cols, false);
  for (std::size_t k = 0; k < cols; ++k) {
    std::size_t j = order[k];
    ls[k] = sigma[j];
    for (std::size_t i = 0; i < cols; ++i) vs(i, k) = v(i, j);
    if (sigma[j] <= 1e-14 * largest || sigma[j] == 0.0) {
      ls[k] = sigma[j] <= 1e-300 ? 0.0 : sigma[j];
      missing[k] = true;
      continue;
    }
    for (std::size_t i = 0; i < rows; ++i) us(i, k) = u(i, j) / sigma[j];
  }

  // Complete U where the singular value vanished, using standard basis vectors.
  std::size_t candidate = 0;
  std::vector<double> e(rows);
  for (std::size_t k = 0; k < cols; ++k) {
    if (!missing[k]) continue;
    while (candidate < rows) {
      std::fill(e.begin(), e.end(), 0.0);
      e[candidate++] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < cols; ++j) {
          if (missing[j] && j >= k) continue;
          double r = 0.0;
          for (std::size_t i = 0; i < rows; ++i) r += us(i, j) * e[i];
          for (std::size_t i = 0; i < rows; ++i) e[i] -= r * us(i, j);
        }
      }
      double nrm = norm2(e);
      if (nrm > 1e-8) {
        for (std::size_t i = 0; i < rows; ++i) us(i, k) = e[i] / nrm;
        missing[k] = false;
        break;
      }
    }
  }

  return SvdResult{std::move(us), DiagonalMatrix(std::move(ls)), std::move(vs)};
}

}  // namespace

SvdResult classical_svd(const Matrix& m) {
  if (m.empty()) throw Error(ErrorCode::InvalidArgument, "classical_svd: empty matrix");
  m.require_finite("classical_svd");
  SvdResult r;
  if (m.rows() >= m.cols()) {
    r = jacobi_tall(m);
  } else {
    SvdResult t = jacobi_tall(m.transposed());
    r = SvdResult{std::move(t.v), std::move(t.singular_values), std::move(t.u)};
  }
  apply_sign_convention(r.u, &r.v);
  return r;
}

Matrix reconstruct(const SvdResult& svd) { return truncate(svd, svd.singular_values.size()); }

Matrix truncate(const SvdResult& svd, std::size_t rank) {
  rank = std::min(rank, svd.singular_values.size());
  Matrix out(svd.u.rows(), svd.v.rows());
  for (std::size_t k = 0; k < rank; ++k) {
    double l = svd.singular_values[k];
    for (std::size_t i = 0; i < out.rows(); ++i) {
      double ul = svd.u(i, k) * l;
      for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += ul * svd.v(j, k);
    }
  }
  return out;
}

}  // namespace robsvd
