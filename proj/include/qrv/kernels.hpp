#pragma once

#include <cstddef>
#include <span>
#include <string>

// Vectorized inner-loop kernels. Every kernel has a scalar reference
// implementation and (on x86-64) an AVX2 variant; the active backend is
// picked once at startup from CPUID and can be overridden for testing.
// SIMD variants must agree with the scalar reference up to summation
// order, which the kernel equivalence tests pin down.

namespace qrv::kernels {

enum class Backend { Scalar, Avx2 };

// Backend currently in use for all kernel calls.
Backend active_backend();

// Force a backend (no-op request if unsupported on this CPU; returns the
// backend actually selected). Used by equivalence tests and the
// QRV_FORCE_SCALAR environment variable.
Backend set_backend(Backend b);

std::string backend_name(Backend b);

// sum of x[i]^2
double sum_sq(std::span<const double> x);

// sums of squares split by sign: neg gets x[i]^2 where x[i] < 0,
// pos gets x[i]^2 where x[i] > 0; zeros contribute to neither.
void sum_sq_signed(std::span<const double> x, double& neg, double& pos);

// Sliding median of |x[i]|,|x[i+1]|,|x[i+2]| over i = 0..n-3:
// accumulates med^2 into sum_sq and med^4 into sum_quart.
// Requires x.size() >= 3.
void med3_pow_sums(std::span<const double> x, double& sum_sq, double& sum_quart);

// sum over i of (alpha - 1{r[i] < 0}) * r[i]  (check loss / tick loss)
double check_loss_sum(std::span<const double> r, double alpha);

// plain dot product
double dot(std::span<const double> a, std::span<const double> b);

namespace detail {
// Scalar reference implementations, always available (used as the oracle
// side of the backend equivalence tests).
double sum_sq_scalar(const double* x, std::size_t n);
void sum_sq_signed_scalar(const double* x, std::size_t n, double& neg, double& pos);
void med3_pow_sums_scalar(const double* x, std::size_t n, double& s2, double& s4);
double check_loss_sum_scalar(const double* r, std::size_t n, double alpha);
double dot_scalar(const double* a, const double* b, std::size_t n);

#if defined(__x86_64__)
double sum_sq_avx2(const double* x, std::size_t n);
void sum_sq_signed_avx2(const double* x, std::size_t n, double& neg, double& pos);
void med3_pow_sums_avx2(const double* x, std::size_t n, double& s2, double& s4);
double check_loss_sum_avx2(const double* r, std::size_t n, double alpha);
double dot_avx2(const double* a, const double* b, std::size_t n);
#endif
}  // namespace detail

}  // namespace qrv::kernels
