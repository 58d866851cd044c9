#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "gnncert/error.hpp"

namespace gnncert {

/// Dense row-major matrix of doubles. The only numerical carrier in the
/// library: features, weights, Laplacians and incidence matrices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Matrix transpose() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s) noexcept;

  bool all_finite() const noexcept;

  friend bool operator==(const Matrix& a, const Matrix& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);

/// Matrix product a * b.
Matrix matmul(const Matrix& a, const Matrix& b);
/// aᵀ * b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a * bᵀ without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix map(const Matrix& m, const std::function<double(double)>& f);

/// 1×cols mean of the rows.
Matrix row_mean(const Matrix& m);

/// Euclidean norm of one row.
double row_norm(const Matrix& m, std::size_t r);
/// max_i |m[i,:]|₂; 0 for a matrix with no rows.
double max_row_norm(const Matrix& m);

double frobenius_norm(const Matrix& m);
/// Max absolute row sum.
double inf_norm(const Matrix& m);
/// Max absolute column sum.
double one_norm(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);

/// Thrown when power iteration does not settle. Carries the last estimate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double estimate, double residual,
                   std::vector<double> iterate)
      : Error(what), estimate_(estimate), residual_(residual), iterate_(std::move(iterate)) {}

  double estimate() const noexcept { return estimate_; }
  double residual() const noexcept { return residual_; }
  const std::vector<double>& iterate() const noexcept { return iterate_; }

 private:
  double estimate_;
  double residual_;
  std::vector<double> iterate_;
};

struct SpectralOptions {
  double tol = 1e-10;
  int max_iters = 10000;
};

/// Largest singular value by power iteration on the smaller Gram matrix,
/// started from the normalized all-ones vector. Deterministic.
double spectral_norm(const Matrix& m, SpectralOptions opts = {});

}  // namespace gnncert
