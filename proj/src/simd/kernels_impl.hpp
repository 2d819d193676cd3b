#pragma once

#include <cstddef>

namespace calf::simd::scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemv(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols);
void gemv_t_acc(const double* w, const double* v, double* y, std::size_t rows, std::size_t cols);
void ger(double alpha, const double* u, const double* v, double* w, std::size_t rows,
         std::size_t cols);
void clamp(double* x, std::size_t n, double lo, double hi);
}  // namespace calf::simd::scalar

#if defined(__x86_64__) || defined(_M_X64)
#define CALF_HAVE_AVX2_KERNELS 1
namespace calf::simd::avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemv(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols);
void gemv_t_acc(const double* w, const double* v, double* y, std::size_t rows, std::size_t cols);
void ger(double alpha, const double* u, const double* v, double* w, std::size_t rows,
         std::size_t cols);
void clamp(double* x, std::size_t n, double lo, double hi);
}  // namespace calf::simd::avx2
#else
#define CALF_HAVE_AVX2_KERNELS 0
#endif
