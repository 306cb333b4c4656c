#include "neurotext/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace neurotext {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double norm2(const double* a, std::size_t n) { return std::sqrt(dot(a, a, n)); }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dimensions differ");
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.row(k);
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
  return out;
}

Matrix transpose_matmul(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) throw std::invalid_argument("transpose_matmul: row counts differ");
  Matrix out(a.cols, b.cols);
  for (std::size_t r = 0; r < a.rows; ++r) {
    const double* arow = a.row(r);
    const double* brow = b.row(r);
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double ari = arow[i];
      if (ari == 0.0) continue;
      double* orow = out.row(i);
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += ari * brow[j];
    }
  }
  return out;
}

Matrix gram(const Matrix& a) { return transpose_matmul(a, a); }

Matrix cholesky_solve(Matrix a, const Matrix& b) {
  if (a.rows != a.cols) throw std::invalid_argument("cholesky_solve: matrix not square");
  if (a.rows != b.rows) throw std::invalid_argument("cholesky_solve: rhs row count differs");
  const std::size_t n = a.rows;

  // In-place lower Cholesky factor. The pivot threshold is relative to the
  // largest diagonal entry so near-singular systems fail instead of
  // producing garbage.
  double diag_max = 0.0;
  for (std::size_t j = 0; j < n; ++j) diag_max = std::max(diag_max, std::abs(a(j, j)));
  const double threshold = diag_max * n * 1e-14;
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j) - dot(a.row(j), a.row(j), j);
    if (!(d > threshold)) throw std::runtime_error("cholesky_solve: matrix is singular");
    d = std::sqrt(d);
    a(j, j) = d;
    for (std::size_t i = j + 1; i < n; ++i)
      a(i, j) = (a(i, j) - dot(a.row(i), a.row(j), j)) / d;
  }

  // Forward then backward substitution, column block at a time.
  Matrix x = b;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) {
      const double lik = a(i, k);
      if (lik == 0.0) continue;
      const double* xk = x.row(k);
      double* xi = x.row(i);
      for (std::size_t c = 0; c < x.cols; ++c) xi[c] -= lik * xk[c];
    }
    const double lii = a(i, i);
    double* xi = x.row(i);
    for (std::size_t c = 0; c < x.cols; ++c) xi[c] /= lii;
  }
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t k = ii + 1; k < n; ++k) {
      const double lki = a(k, ii);
      if (lki == 0.0) continue;
      const double* xk = x.row(k);
      double* xi = x.row(ii);
      for (std::size_t c = 0; c < x.cols; ++c) xi[c] -= lki * xk[c];
    }
    const double lii = a(ii, ii);
    double* xi = x.row(ii);
    for (std::size_t c = 0; c < x.cols; ++c) xi[c] /= lii;
  }
  return x;
}

}  // namespace neurotext
