#pragma once

#include <cstddef>

namespace hsi::kernels {

enum class Backend { scalar, avx2 };

const char* backend_name(Backend b);
bool backend_available(Backend b);
/// Best available backend, detected once at startup. Overridable for tests
/// and benchmarks via set_backend; set_backend throws ConfigError when the
/// requested backend is not available on this machine.
Backend active_backend();
void set_backend(Backend b);

/// Elementwise sign(u) * max(|u| - tau, 0). src and dst may alias.
void soft_threshold(const double* src, double* dst, std::size_t n, double tau);
/// Elementwise max(u, 0). src and dst may alias.
void clamp_nonneg(const double* src, double* dst, std::size_t n);
/// Elementwise u * alpha. src and dst may alias.
void scale(const double* src, double* dst, std::size_t n, double alpha);
double sum_sq(const double* src, std::size_t n);
double sum_abs(const double* src, std::size_t n);
double sum_sq_diff(const double* a, const double* b, std::size_t n);

/// Backend-specific entry points, exposed so the two implementations can be
/// compared directly.
namespace scalar_impl {
void soft_threshold(const double* src, double* dst, std::size_t n, double tau);
void clamp_nonneg(const double* src, double* dst, std::size_t n);
void scale(const double* src, double* dst, std::size_t n, double alpha);
double sum_sq(const double* src, std::size_t n);
double sum_abs(const double* src, std::size_t n);
double sum_sq_diff(const double* a, const double* b, std::size_t n);
}  // namespace scalar_impl

namespace avx2_impl {
/// True when this translation unit was actually built with AVX2 codegen;
/// when false the avx2_impl functions forward to scalar_impl.
bool compiled_with_avx2();
void soft_threshold(const double* src, double* dst, std::size_t n, double tau);
void clamp_nonneg(const double* src, double* dst, std::size_t n);
void scale(const double* src, double* dst, std::size_t n, double alpha);
double sum_sq(const double* src, std::size_t n);
double sum_abs(const double* src, std::size_t n);
double sum_sq_diff(const double* a, const double* b, std::size_t n);
}  // namespace avx2_impl

}  // namespace hsi::kernels
