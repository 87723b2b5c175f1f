#include "hsi/kernels/kernels.hpp"

#ifdef __AVX2__
#include <immintrin.h>
#endif

#include <cmath>

namespace hsi::kernels::avx2_impl {

#ifdef __AVX2__

bool compiled_with_avx2() { return true; }

namespace {

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d upper = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, upper));
}

}  // namespace

void soft_threshold(const double* src, double* dst, std::size_t n, double tau) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d vtau = _mm256_set1_pd(tau);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d u = _mm256_loadu_pd(src + i);
    const __m256d sign = _mm256_and_pd(u, sign_mask);
    const __m256d mag = _mm256_andnot_pd(sign_mask, u);
    const __m256d shrunk = _mm256_max_pd(_mm256_sub_pd(mag, vtau), zero);
    _mm256_storeu_pd(dst + i, _mm256_or_pd(shrunk, sign));
  }
  for (; i < n; ++i) {
    const double u = src[i];
    double a = std::fabs(u) - tau;
    a = (a > 0.0) ? a : 0.0;
    dst[i] = std::copysign(a, u);
  }
}

void clamp_nonneg(const double* src, double* dst, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(dst + i, _mm256_max_pd(_mm256_loadu_pd(src + i), zero));
  }
  for (; i < n; ++i) {
    const double u = src[i];
    dst[i] = (u > 0.0) ? u : 0.0;
  }
}

void scale(const double* src, double* dst, std::size_t n, double alpha) {
  const __m256d valpha = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(_mm256_loadu_pd(src + i), valpha));
  }
  for (; i < n; ++i) {
    dst[i] = src[i] * alpha;
  }
}

double sum_sq(const double* src, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d u = _mm256_loadu_pd(src + i);
    acc = _mm256_fmadd_pd(u, u, acc);
  }
  double r = hsum(acc);
  for (; i < n; ++i) {
    r += src[i] * src[i];
  }
  return r;
}

double sum_abs(const double* src, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(src + i)));
  }
  double r = hsum(acc);
  for (; i < n; ++i) {
    r += std::fabs(src[i]);
  }
  return r;
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double r = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    r += d * d;
  }
  return r;
}

#else  // no AVX2 at compile time: forward to the reference implementation

bool compiled_with_avx2() { return false; }

void soft_threshold(const double* src, double* dst, std::size_t n, double tau) {
  scalar_impl::soft_threshold(src, dst, n, tau);
}
void clamp_nonneg(const double* src, double* dst, std::size_t n) {
  scalar_impl::clamp_nonneg(src, dst, n);
}
void scale(const double* src, double* dst, std::size_t n, double alpha) {
  scalar_impl::scale(src, dst, n, alpha);
}
double sum_sq(const double* src, std::size_t n) {
  return scalar_impl::sum_sq(src, n);
}
double sum_abs(const double* src, std::size_t n) {
  return scalar_impl::sum_abs(src, n);
}
double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  return scalar_impl::sum_sq_diff(a, b, n);
}

#endif

}  // namespace hsi::kernels::avx2_impl
