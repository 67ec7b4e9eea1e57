#pragma once

#include <cstdint>
#include <vector>

namespace stylus {

// Row-major dense double matrix. Everything numeric in the toolkit runs in
// double precision so gradient checks are meaningful.
struct Matrix {
  size_t rows = 0, cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(size_t i, size_t j) { return data[i * cols + j]; }
  double operator()(size_t i, size_t j) const { return data[i * cols + j]; }
  double* row(size_t i) { return data.data() + i * cols; }
  const double* row(size_t i) const { return data.data() + i * cols; }
  void zero() { std::fill(data.begin(), data.end(), 0.0); }
};

// y += M x
inline void gemv_accum(const Matrix& m, const double* x, double* y) {
  for (size_t i = 0; i < m.rows; ++i) {
    const double* r = m.row(i);
    double s = 0;
    for (size_t j = 0; j < m.cols; ++j) s += r[j] * x[j];
    y[i] += s;
  }
}

// y += M^T x
inline void gemv_t_accum(const Matrix& m, const double* x, double* y) {
  for (size_t i = 0; i < m.rows; ++i) {
    const double* r = m.row(i);
    double xi = x[i];
    for (size_t j = 0; j < m.cols; ++j) y[j] += r[j] * xi;
  }
}

// M += a b^T
inline void outer_accum(Matrix& m, const double* a, const double* b) {
  for (size_t i = 0; i < m.rows; ++i) {
    double* r = m.row(i);
    double ai = a[i];
    for (size_t j = 0; j < m.cols; ++j) r[j] += ai * b[j];
  }
}

inline double dot_n(const double* a, const double* b, size_t n) {
  double s = 0;
  for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace stylus
