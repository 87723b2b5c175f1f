#include "hsi/kernels/kernels.hpp"

#include "hsi/types.hpp"

#include <atomic>
#include <string>

namespace hsi::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

bool avx2_usable() {
  // Both conditions matter: the CPU must support the instructions and the
  // avx2 translation unit must have been built with them enabled.
  return cpu_has_avx2() && avx2_impl::compiled_with_avx2();
}

Backend detect() {
  return avx2_usable() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& backend_slot() {
  static std::atomic<Backend> slot{detect()};
  return slot;
}

}  // namespace

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
  }
  return "unknown";
}

bool backend_available(Backend b) {
  switch (b) {
    case Backend::scalar: return true;
    case Backend::avx2: return avx2_usable();
  }
  return false;
}

Backend active_backend() { return backend_slot().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (!backend_available(b)) {
    throw ConfigError(std::string("kernel backend '") + backend_name(b) +
                      "' is not available on this machine");
  }
  backend_slot().store(b, std::memory_order_relaxed);
}

void soft_threshold(const double* src, double* dst, std::size_t n, double tau) {
  if (active_backend() == Backend::avx2) {
    avx2_impl::soft_threshold(src, dst, n, tau);
  } else {
    scalar_impl::soft_threshold(src, dst, n, tau);
  }
}

void clamp_nonneg(const double* src, double* dst, std::size_t n) {
  if (active_backend() == Backend::avx2) {
    avx2_impl::clamp_nonneg(src, dst, n);
  } else {
    scalar_impl::clamp_nonneg(src, dst, n);
  }
}

void scale(const double* src, double* dst, std::size_t n, double alpha) {
  if (active_backend() == Backend::avx2) {
    avx2_impl::scale(src, dst, n, alpha);
  } else {
    scalar_impl::scale(src, dst, n, alpha);
  }
}

double sum_sq(const double* src, std::size_t n) {
  return active_backend() == Backend::avx2 ? avx2_impl::sum_sq(src, n)
                                           : scalar_impl::sum_sq(src, n);
}

double sum_abs(const double* src, std::size_t n) {
  return active_backend() == Backend::avx2 ? avx2_impl::sum_abs(src, n)
                                           : scalar_impl::sum_abs(src, n);
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  return active_backend() == Backend::avx2 ? avx2_impl::sum_sq_diff(a, b, n)
                                           : scalar_impl::sum_sq_diff(a, b, n);
}

}  // namespace hsi::kernels
