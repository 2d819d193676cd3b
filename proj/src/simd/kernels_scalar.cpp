#include "kernels_impl.hpp"

#include <algorithm>

namespace calf::simd::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot(w + r * cols, x, cols);
}

void gemv_t_acc(const double* w, const double* v, double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(v[r], w + r * cols, y, cols);
}

void ger(double alpha, const double* u, const double* v, double* w, std::size_t rows,
         std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(alpha * u[r], v, w + r * cols, cols);
}

void clamp(double* x, std::size_t n, double lo, double hi) {
  for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lo, hi);
}

}  // namespace calf::simd::scalar
