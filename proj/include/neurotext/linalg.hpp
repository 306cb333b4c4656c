#pragma once

#include <cstddef>
#include <vector>

namespace neurotext {

// Dense row-major matrix of doubles. Small and boring on purpose: every
// numeric routine in this project works on contiguous rows.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return v[r * cols + c]; }

  double* row(std::size_t r) { return v.data() + r * cols; }
  const double* row(std::size_t r) const { return v.data() + r * cols; }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

Matrix matmul(const Matrix& a, const Matrix& b);          // a(r x k) * b(k x c)
Matrix transpose(const Matrix& a);
Matrix gram(const Matrix& a);                             // a^T a, (cols x cols)
Matrix transpose_matmul(const Matrix& a, const Matrix& b);  // a^T b

// Solves (A) X = B for symmetric positive-definite A via Cholesky.
// Throws std::runtime_error if A is not positive definite.
Matrix cholesky_solve(Matrix a, const Matrix& b);

double dot(const double* a, const double* b, std::size_t n);
double norm2(const double* a, std::size_t n);

}  // namespace neurotext
