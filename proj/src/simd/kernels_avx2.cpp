#include "kernels_impl.hpp"

#if CALF_HAVE_AVX2_KERNELS

#include <immintrin.h>

#include <algorithm>

#define CALF_AVX2 __attribute__((target("avx2,fma")))

namespace calf::simd::avx2 {

namespace {

CALF_AVX2 inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

}  // namespace

CALF_AVX2 double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

CALF_AVX2 void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

CALF_AVX2 void gemv(const double* w, const double* x, double* y, std::size_t rows,
                    std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot(w + r * cols, x, cols);
}

CALF_AVX2 void gemv_t_acc(const double* w, const double* v, double* y, std::size_t rows,
                          std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(v[r], w + r * cols, y, cols);
}

CALF_AVX2 void ger(double alpha, const double* u, const double* v, double* w, std::size_t rows,
                   std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(alpha * u[r], v, w + r * cols, cols);
}

CALF_AVX2 void clamp(double* x, std::size_t n, double lo, double hi) {
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vhi = _mm256_set1_pd(hi);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(x + i, _mm256_min_pd(_mm256_max_pd(v, vlo), vhi));
  }
  for (; i < n; ++i) x[i] = std::clamp(x[i], lo, hi);
}

}  // namespace calf::simd::avx2

#endif
