#pragma once

// Dense inner-loop kernels used by the critic, the greedy actor and the
// baseline networks. Each kernel has a scalar reference implementation and an
// AVX2/FMA variant; the variant is chosen once at runtime from CPUID and can be
// forced with CALF_SIMD=scalar|avx2 or set_backend(). Variants agree to
// rounding (summation order differs), which the equivalence tests pin down.

#include <cstddef>
#include <span>
#include <string_view>

namespace calf::simd {

enum class Backend { scalar, avx2 };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = W x, W row-major rows x cols
  void (*gemv)(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols);
  // y += W^T v
  void (*gemv_t_acc)(const double* w, const double* v, double* y, std::size_t rows,
                     std::size_t cols);
  // W += alpha u v^T
  void (*ger)(double alpha, const double* u, const double* v, double* w, std::size_t rows,
              std::size_t cols);
  void (*clamp)(double* x, std::size_t n, double lo, double hi);
};

const KernelTable& table(Backend b);

bool avx2_available() noexcept;
Backend active_backend() noexcept;
/// Throws ConfigError when asking for avx2 on a CPU without it.
void set_backend(Backend b);
std::string_view backend_name(Backend b) noexcept;

inline const KernelTable& active() { return table(active_backend()); }

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void gemv(std::span<const double> w, std::span<const double> x, std::span<double> y) {
  active().gemv(w.data(), x.data(), y.data(), y.size(), x.size());
}

inline void gemv_t_acc(std::span<const double> w, std::span<const double> v, std::span<double> y) {
  active().gemv_t_acc(w.data(), v.data(), y.data(), v.size(), y.size());
}

inline void ger(double alpha, std::span<const double> u, std::span<const double> v,
                std::span<double> w) {
  active().ger(alpha, u.data(), v.data(), w.data(), u.size(), v.size());
}

inline void clamp(std::span<double> x, double lo, double hi) {
  active().clamp(x.data(), x.size(), lo, hi);
}

}  // namespace calf::simd
