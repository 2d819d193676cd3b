#include <atomic>
#include <cstdlib>
#include <string>

#include "calf/error.hpp"
#include "calf/simd/kernels.hpp"
#include "kernels_impl.hpp"

namespace calf::simd {

namespace {

constexpr KernelTable kScalar{scalar::dot,        scalar::axpy, scalar::gemv,
                              scalar::gemv_t_acc, scalar::ger,  scalar::clamp};

#if CALF_HAVE_AVX2_KERNELS
constexpr KernelTable kAvx2{avx2::dot,        avx2::axpy, avx2::gemv,
                            avx2::gemv_t_acc, avx2::ger,  avx2::clamp};
#endif

Backend detect() {
  const char* env = std::getenv("CALF_SIMD");
  if (env != nullptr && std::string(env) == "scalar") return Backend::scalar;
  return avx2_available() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{detect()};
  return b;
}

}  // namespace

bool avx2_available() noexcept {
#if CALF_HAVE_AVX2_KERNELS
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& table(Backend b) {
#if CALF_HAVE_AVX2_KERNELS
  if (b == Backend::avx2) {
    if (!avx2_available()) throw ConfigError("AVX2 kernels requested but CPU lacks AVX2/FMA");
    return kAvx2;
  }
#else
  if (b == Backend::avx2) throw ConfigError("AVX2 kernels not compiled for this target");
#endif
  return kScalar;
}

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  (void)table(b);
  current().store(b, std::memory_order_relaxed);
}

std::string_view backend_name(Backend b) noexcept {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

}  // namespace calf::simd
