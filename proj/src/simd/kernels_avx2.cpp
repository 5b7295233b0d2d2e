// Compiled with -mavx2 -mfma; only reached through the dispatch table when
// the CPU reports both features.

#include "matern/simd.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace matern::simd::detail {
namespace {

constexpr std::size_t kLanes = 4;

inline double hsum(__m256d v) {
    alignas(32) double lanes[kLanes];
    _mm256_store_pd(lanes, v);
    return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

// exp(x) for x in [-708, 709.7]; lanes below -708 flush to zero.
inline __m256d exp_pd(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
    const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
    const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
    const __m256d lo_cut = _mm256_set1_pd(-708.0);
    const __m256d hi_cut = _mm256_set1_pd(709.7);

    const __m256d underflow = _mm256_cmp_pd(x, lo_cut, _CMP_LT_OQ);
    x = _mm256_min_pd(_mm256_max_pd(x, lo_cut), hi_cut);

    const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(k, ln2_hi, x);
    r = _mm256_fnmadd_pd(k, ln2_lo, r);

    // Taylor polynomial of degree 13 on |r| <= ln2/2.
    static constexpr double inv_fact[] = {
        1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
        1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
        1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        0.5,
        1.0,                1.0,
    };
    __m256d p = _mm256_set1_pd(inv_fact[0]);
    for (std::size_t i = 1; i < std::size(inv_fact); ++i) {
        p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(inv_fact[i]));
    }

    // Scale by 2^k through the exponent field.
    const __m128i k32 = _mm256_cvtpd_epi32(k);
    const __m256i k64 = _mm256_cvtepi32_epi64(k32);
    const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(k64, _mm256_set1_epi64x(1023)), 52);
    const __m256d result = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
    return _mm256_andnot_pd(underflow, result);
}

// log(v) for positive normal v; non-positive lanes yield NaN.
inline __m256d log_pd(__m256d v) {
    const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
    const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d sqrt2 = _mm256_set1_pd(1.41421356237309504880);

    const __m256d invalid = _mm256_cmp_pd(v, _mm256_setzero_pd(), _CMP_LE_OQ);

    const __m256i bits = _mm256_castpd_si256(v);
    const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
    const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
    __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));

    // Unbiased exponent as double: ((bits >> 52) & 0x7FF) - 1023.
    const __m256i e_bits = _mm256_and_si256(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(0x7FF));
    alignas(32) std::int64_t e_lanes[kLanes];
    _mm256_store_si256(reinterpret_cast<__m256i*>(e_lanes), e_bits);
    __m256d e = _mm256_set_pd(static_cast<double>(e_lanes[3] - 1023),
                              static_cast<double>(e_lanes[2] - 1023),
                              static_cast<double>(e_lanes[1] - 1023),
                              static_cast<double>(e_lanes[0] - 1023));

    // Fold m into [sqrt(1/2), sqrt(2)).
    const __m256d big = _mm256_cmp_pd(m, sqrt2, _CMP_GE_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
    e = _mm256_add_pd(e, _mm256_and_pd(big, one));

    // log(m) = 2 atanh(s), s = (m - 1) / (m + 1).
    const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
    const __m256d s2 = _mm256_mul_pd(s, s);
    static constexpr double odd_inv[] = {
        1.0 / 23.0, 1.0 / 21.0, 1.0 / 19.0, 1.0 / 17.0, 1.0 / 15.0, 1.0 / 13.0,
        1.0 / 11.0, 1.0 / 9.0,  1.0 / 7.0,  1.0 / 5.0,  1.0 / 3.0,
    };
    __m256d q = _mm256_set1_pd(odd_inv[0]);
    for (std::size_t i = 1; i < std::size(odd_inv); ++i) {
        q = _mm256_fmadd_pd(q, s2, _mm256_set1_pd(odd_inv[i]));
    }
    // 2 s + 2 s^3 q, keeping the leading term exact.
    const __m256d two_s = _mm256_add_pd(s, s);
    const __m256d tail = _mm256_mul_pd(_mm256_mul_pd(two_s, s2), q);
    const __m256d log_m = _mm256_add_pd(two_s, tail);

    __m256d result = _mm256_fmadd_pd(e, ln2_lo, log_m);
    result = _mm256_fmadd_pd(e, ln2_hi, result);
    return _mm256_or_pd(result, _mm256_and_pd(invalid, _mm256_set1_pd(std::nan(""))));
}

void distances_avx2(const double* const* axes, int d, std::size_t n, const double* point,
                    double* out) {
    std::size_t j = 0;
    for (; j + kLanes <= n; j += kLanes) {
        __m256d acc = _mm256_setzero_pd();
        for (int k = 0; k < d; ++k) {
            const __m256d diff =
                _mm256_sub_pd(_mm256_set1_pd(point[k]), _mm256_loadu_pd(axes[k] + j));
            acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
        }
        _mm256_storeu_pd(out + j, _mm256_sqrt_pd(acc));
    }
    for (; j < n; ++j) {
        double acc = 0.0;
        for (int k = 0; k < d; ++k) {
            const double diff = point[k] - axes[k][j];
            acc += diff * diff;
        }
        out[j] = std::sqrt(acc);
    }
}

void exp_neg_scaled_avx2(const double* x, double scale, std::size_t n, double* out) {
    const __m256d neg_scale = _mm256_set1_pd(-scale);
    std::size_t j = 0;
    for (; j + kLanes <= n; j += kLanes) {
        _mm256_storeu_pd(out + j, exp_pd(_mm256_mul_pd(neg_scale, _mm256_loadu_pd(x + j))));
    }
    if (j < n) {
        alignas(32) double buf[kLanes] = {0.0, 0.0, 0.0, 0.0};
        std::copy(x + j, x + n, buf);
        _mm256_store_pd(buf, exp_pd(_mm256_mul_pd(neg_scale, _mm256_load_pd(buf))));
        std::copy(buf, buf + (n - j), out + j);
    }
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 2 * kLanes <= n; j += 2 * kLanes) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j + kLanes), _mm256_loadu_pd(b + j + kLanes),
                               acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; j < n; ++j) acc += a[j] * b[j];
    return acc;
}

double dot3_avx2(const double* a, const double* b, const double* c, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 2 * kLanes <= n; j += 2 * kLanes) {
        const __m256d ab0 = _mm256_mul_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j));
        const __m256d ab1 =
            _mm256_mul_pd(_mm256_loadu_pd(a + j + kLanes), _mm256_loadu_pd(b + j + kLanes));
        acc0 = _mm256_fmadd_pd(ab0, _mm256_loadu_pd(c + j), acc0);
        acc1 = _mm256_fmadd_pd(ab1, _mm256_loadu_pd(c + j + kLanes), acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; j < n; ++j) acc += a[j] * b[j] * c[j];
    return acc;
}

SpectralSums spectral_sums_avx2(const double* lambda, const double* z2, std::size_t n,
                                double tau2, double sigma2) {
    const __m256d t = _mm256_set1_pd(tau2);
    const __m256d s = _mm256_set1_pd(sigma2);
    __m256d quad = _mm256_setzero_pd();
    __m256d logdet = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + kLanes <= n; j += kLanes) {
        const __m256d v = _mm256_fmadd_pd(s, _mm256_loadu_pd(lambda + j), t);
        quad = _mm256_add_pd(quad, _mm256_div_pd(_mm256_loadu_pd(z2 + j), v));
        logdet = _mm256_add_pd(logdet, log_pd(v));
    }
    SpectralSums out{hsum(quad), hsum(logdet)};
    if (j < n) {
        // Pad with v = 1 lanes (log 1 = 0, z2 = 0) so the tail uses the same arithmetic.
        alignas(32) double lam[kLanes] = {0.0, 0.0, 0.0, 0.0};
        alignas(32) double zz[kLanes] = {0.0, 0.0, 0.0, 0.0};
        alignas(32) double pad_t[kLanes] = {1.0, 1.0, 1.0, 1.0};
        for (std::size_t k = 0; j + k < n; ++k) {
            lam[k] = lambda[j + k];
            zz[k] = z2[j + k];
            pad_t[k] = tau2;
        }
        const __m256d v =
            _mm256_fmadd_pd(s, _mm256_load_pd(lam), _mm256_load_pd(pad_t));
        out.quad += hsum(_mm256_div_pd(_mm256_load_pd(zz), v));
        out.logdet += hsum(log_pd(v));
    }
    return out;
}

}  // namespace

const KernelTable avx2_table{
    distances_avx2, exp_neg_scaled_avx2, dot_avx2, dot3_avx2, spectral_sums_avx2,
};

}  // namespace matern::simd::detail
