#include "hsi/kernels/kernels.hpp"

#include <cmath>

namespace hsi::kernels::scalar_impl {

void soft_threshold(const double* src, double* dst, std::size_t n, double tau) {
  for (std::size_t i = 0; i < n; ++i) {
    const double u = src[i];
    double a = std::fabs(u) - tau;
    a = (a > 0.0) ? a : 0.0;
    dst[i] = std::copysign(a, u);
  }
}

void clamp_nonneg(const double* src, double* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double u = src[i];
    dst[i] = (u > 0.0) ? u : 0.0;
  }
}

void scale(const double* src, double* dst, std::size_t n, double alpha) {
  for (std::size_t i = 0; i < n; ++i) {
    dst[i] = src[i] * alpha;
  }
}

double sum_sq(const double* src, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += src[i] * src[i];
  }
  return acc;
}

double sum_abs(const double* src, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += std::fabs(src[i]);
  }
  return acc;
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace hsi::kernels::scalar_impl
