// AVX2 kernel variants. This translation unit is compiled with -mavx2 and is
// only entered after the dispatcher has confirmed CPU support.

#include "qrv/kernels.hpp"

#if defined(__x86_64__)

#include <immintrin.h>

#include <cmath>

namespace qrv::kernels::detail {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline __m256d abs_pd(__m256d v) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    return _mm256_and_pd(v, mask);
}

}  // namespace

double sum_sq_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i] * x[i];
    return s;
}

void sum_sq_signed_avx2(const double* x, std::size_t n, double& neg, double& pos) {
    const __m256d zero = _mm256_setzero_pd();
    __m256d accn = zero, accp = zero;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        const __m256d sq = _mm256_mul_pd(v, v);
        const __m256d mneg = _mm256_cmp_pd(v, zero, _CMP_LT_OQ);
        const __m256d mpos = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
        accn = _mm256_add_pd(accn, _mm256_and_pd(sq, mneg));
        accp = _mm256_add_pd(accp, _mm256_and_pd(sq, mpos));
    }
    double sn = hsum(accn), sp = hsum(accp);
    for (; i < n; ++i) {
        const double sq = x[i] * x[i];
        if (x[i] < 0.0) sn += sq;
        else if (x[i] > 0.0) sp += sq;
    }
    neg = sn;
    pos = sp;
}

void med3_pow_sums_avx2(const double* x, std::size_t n, double& s2, double& s4) {
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc4 = _mm256_setzero_pd();
    std::size_t i = 0;
    if (n >= 3) {
        // triple (i, i+1, i+2): last load touches x[i+5], so stop at i+6 <= n
        for (; i + 6 <= n; i += 4) {
            const __m256d a = abs_pd(_mm256_loadu_pd(x + i));
            const __m256d b = abs_pd(_mm256_loadu_pd(x + i + 1));
            const __m256d c = abs_pd(_mm256_loadu_pd(x + i + 2));
            // med3 = max(min(a,b), min(max(a,b), c))
            const __m256d mn = _mm256_min_pd(a, b);
            const __m256d mx = _mm256_max_pd(a, b);
            const __m256d med = _mm256_max_pd(mn, _mm256_min_pd(mx, c));
            const __m256d m2 = _mm256_mul_pd(med, med);
            acc2 = _mm256_add_pd(acc2, m2);
            acc4 = _mm256_add_pd(acc4, _mm256_mul_pd(m2, m2));
        }
    }
    double a2 = hsum(acc2), a4 = hsum(acc4);
    for (; i + 2 < n; ++i) {
        const double a = std::fabs(x[i]), b = std::fabs(x[i + 1]), c = std::fabs(x[i + 2]);
        const double m = std::max(std::min(a, b), std::min(std::max(a, b), c));
        const double m2 = m * m;
        a2 += m2;
        a4 += m2 * m2;
    }
    s2 = a2;
    s4 = a4;
}

double check_loss_sum_avx2(const double* r, std::size_t n, double alpha) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d va = _mm256_set1_pd(alpha);
    const __m256d vam1 = _mm256_set1_pd(alpha - 1.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(r + i);
        const __m256d mneg = _mm256_cmp_pd(v, zero, _CMP_LT_OQ);
        const __m256d w = _mm256_blendv_pd(va, vam1, mneg);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(w, v));
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double w = (r[i] < 0.0) ? (alpha - 1.0) : alpha;
        s += w * r[i];
    }
    return s;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

}  // namespace qrv::kernels::detail

#endif  // __x86_64__
