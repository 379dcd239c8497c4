#include "qrv/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace qrv::kernels::detail {

double sum_sq_scalar(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

void sum_sq_signed_scalar(const double* x, std::size_t n, double& neg, double& pos) {
    double sn = 0.0, sp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sq = x[i] * x[i];
        if (x[i] < 0.0) sn += sq;
        else if (x[i] > 0.0) sp += sq;
    }
    neg = sn;
    pos = sp;
}

// median via min/max network so the SIMD variant is bit-identical per element
static inline double med3(double a, double b, double c) {
    return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

void med3_pow_sums_scalar(const double* x, std::size_t n, double& s2, double& s4) {
    double a2 = 0.0, a4 = 0.0;
    for (std::size_t i = 0; i + 2 < n; ++i) {
        const double m = med3(std::fabs(x[i]), std::fabs(x[i + 1]), std::fabs(x[i + 2]));
        const double m2 = m * m;
        a2 += m2;
        a4 += m2 * m2;
    }
    s2 = a2;
    s4 = a4;
}

double check_loss_sum_scalar(const double* r, std::size_t n, double alpha) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (r[i] < 0.0) ? (alpha - 1.0) : alpha;
        s += w * r[i];
    }
    return s;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

}  // namespace qrv::kernels::detail
