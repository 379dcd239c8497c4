#include "qrv/kernels.hpp"

#include <cstdlib>

namespace qrv::kernels {

namespace {

bool avx2_supported() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

Backend pick_default() {
    if (std::getenv("QRV_FORCE_SCALAR") != nullptr) return Backend::Scalar;
    return avx2_supported() ? Backend::Avx2 : Backend::Scalar;
}

Backend& current() {
    static Backend b = pick_default();
    return b;
}

}  // namespace

Backend active_backend() { return current(); }

Backend set_backend(Backend b) {
    if (b == Backend::Avx2 && !avx2_supported()) b = Backend::Scalar;
    current() = b;
    return current();
}

std::string backend_name(Backend b) {
    switch (b) {
        case Backend::Avx2: return "avx2";
        case Backend::Scalar: break;
    }
    return "scalar";
}

double sum_sq(std::span<const double> x) {
#if defined(__x86_64__)
    if (current() == Backend::Avx2) return detail::sum_sq_avx2(x.data(), x.size());
#endif
    return detail::sum_sq_scalar(x.data(), x.size());
}

void sum_sq_signed(std::span<const double> x, double& neg, double& pos) {
#if defined(__x86_64__)
    if (current() == Backend::Avx2) {
        detail::sum_sq_signed_avx2(x.data(), x.size(), neg, pos);
        return;
    }
#endif
    detail::sum_sq_signed_scalar(x.data(), x.size(), neg, pos);
}

void med3_pow_sums(std::span<const double> x, double& s2, double& s4) {
#if defined(__x86_64__)
    if (current() == Backend::Avx2) {
        detail::med3_pow_sums_avx2(x.data(), x.size(), s2, s4);
        return;
    }
#endif
    detail::med3_pow_sums_scalar(x.data(), x.size(), s2, s4);
}

double check_loss_sum(std::span<const double> r, double alpha) {
#if defined(__x86_64__)
    if (current() == Backend::Avx2) return detail::check_loss_sum_avx2(r.data(), r.size(), alpha);
#endif
    return detail::check_loss_sum_scalar(r.data(), r.size(), alpha);
}

double dot(std::span<const double> a, std::span<const double> b) {
#if defined(__x86_64__)
    if (current() == Backend::Avx2) return detail::dot_avx2(a.data(), b.data(), a.size());
#endif
    return detail::dot_scalar(a.data(), b.data(), a.size());
}

}  // namespace qrv::kernels
