#include "gnncert/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gnncert {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << op << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
       << b.cols();
    throw DimensionError(os.str());
  }
}

void require_nonempty(const Matrix& m, const char* op) {
  if (m.empty()) throw DimensionError(std::string(op) + ": empty matrix");
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("Matrix: data length does not equal rows*cols");
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) noexcept {
  for (double& x : data_) x *= s;
  return *this;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream os;
    os << "matmul: inner dimensions differ (" << a.rows() << "x" << a.cols() << " * " << b.rows()
       << "x" << b.cols() << ")";
    throw DimensionError(os.str());
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Matrix c(n, m);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    double* crow = pc + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = pa[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = pb + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += aip * brow[j];
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("matmul_tn: row counts differ");
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Matrix c(k, m);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  for (std::size_t r = 0; r < n; ++r) {
    const double* brow = pb + r * m;
    for (std::size_t i = 0; i < k; ++i) {
      const double ari = pa[r * k + i];
      if (ari == 0.0) continue;
      double* crow = pc + i * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += ari * brow[j];
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw DimensionError("matmul_nt: column counts differ");
  return matmul(a, b.transpose());
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] *= bd[i];
  return c;
}

Matrix map(const Matrix& m, const std::function<double(double)>& f) {
  Matrix out = m;
  for (double& x : out.data()) x = f(x);
  return out;
}

Matrix row_mean(const Matrix& m) {
  Matrix out(1, m.cols());
  if (m.rows() == 0) return out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) out(0, j) += r[j];
  }
  out *= 1.0 / static_cast<double>(m.rows());
  return out;
}

double row_norm(const Matrix& m, std::size_t r) {
  double s = 0.0;
  for (double x : m.row(r)) s += x * x;
  return std::sqrt(s);
}

double max_row_norm(const Matrix& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) best = std::max(best, row_norm(m, i));
  return best;
}

double frobenius_norm(const Matrix& m) {
  require_nonempty(m, "frobenius_norm");
  double s = 0.0;
  for (double x : m.data()) s += x * x;
  return std::sqrt(s);
}

double inf_norm(const Matrix& m) {
  require_nonempty(m, "inf_norm");
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (double x : m.row(i)) s += std::abs(x);
    best = std::max(best, s);
  }
  return best;
}

double one_norm(const Matrix& m) {
  require_nonempty(m, "one_norm");
  std::vector<double> sums(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) sums[j] += std::abs(r[j]);
  }
  return *std::max_element(sums.begin(), sums.end());
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double best = 0.0;
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < ad.size(); ++i) best = std::max(best, std::abs(ad[i] - bd[i]));
  return best;
}

namespace {

std::vector<double> gram_apply(const Matrix& gram, const std::vector<double>& v) {
  const std::size_t n = gram.rows();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = gram.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += r[j] * v[j];
    out[i] = s;
  }
  return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double normalize(std::vector<double>& v) {
  const double n = std::sqrt(dot(v, v));
  if (n > 0.0)
    for (double& x : v) x /= n;
  return n;
}

}  // namespace

double spectral_norm(const Matrix& m, SpectralOptions opts) {
  require_nonempty(m, "spectral_norm");
  if (!(opts.tol > 0.0)) throw ConfigError("spectral_norm: tol must be positive");

  // Iterate on whichever Gram matrix is smaller; both share the nonzero spectrum.
  const Matrix gram = m.rows() < m.cols() ? matmul_nt(m, m) : matmul_tn(m, m);
  const std::size_t n = gram.rows();

  std::vector<double> v(n, 1.0);
  normalize(v);
  bool restarted = false;
  double lambda = 0.0;
  double residual = 0.0;

  for (int it = 0; it < opts.max_iters; ++it) {
    std::vector<double> w = gram_apply(gram, v);
    const double rq = dot(v, w);
    residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual += (w[i] - rq * v[i]) * (w[i] - rq * v[i]);
    residual = std::sqrt(residual);

    if (normalize(w) == 0.0) {
      if (restarted) return 0.0;
      // The start vector lies in the null space; retry with an alternating
      // vector orthogonal to the all-ones start.
      restarted = true;
      for (std::size_t i = 0; i < n; ++i) v[i] = (i % 2 == 0) ? 1.0 : -1.0;
      if (n % 2 == 1) v[n - 1] = 0.0;
      if (normalize(v) == 0.0) return 0.0;
      lambda = 0.0;
      continue;
    }

    const double sigma_prev = std::sqrt(std::max(lambda, 0.0));
    const double sigma = std::sqrt(std::max(rq, 0.0));
    lambda = rq;
    v = std::move(w);
    if (it > 0 && std::abs(sigma - sigma_prev) <= opts.tol * (1.0 + sigma) &&
        residual <= std::sqrt(opts.tol) * (1.0 + rq)) {
      return sigma;
    }
  }
  throw ConvergenceError("spectral_norm: power iteration did not converge",
                         std::sqrt(std::max(lambda, 0.0)), residual, v);
}

}  // namespace gnncert
