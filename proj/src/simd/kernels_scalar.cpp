#include "matern/simd.hpp"

#include <cmath>

namespace matern::simd::detail {
namespace {

void distances_scalar(const double* const* axes, int d, std::size_t n, const double* point,
                      double* out) {
    for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int k = 0; k < d; ++k) {
            const double diff = point[k] - axes[k][j];
            acc += diff * diff;
        }
        out[j] = std::sqrt(acc);
    }
}

void exp_neg_scaled_scalar(const double* x, double scale, std::size_t n, double* out) {
    for (std::size_t j = 0; j < n; ++j) out[j] = std::exp(-scale * x[j]);
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += a[j] * b[j];
    return acc;
}

double dot3_scalar(const double* a, const double* b, const double* c, std::size_t n) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += a[j] * b[j] * c[j];
    return acc;
}

SpectralSums spectral_sums_scalar(const double* lambda, const double* z2, std::size_t n,
                                  double tau2, double sigma2) {
    SpectralSums s;
    for (std::size_t j = 0; j < n; ++j) {
        const double v = tau2 + sigma2 * lambda[j];
        s.quad += z2[j] / v;
        s.logdet += std::log(v);
    }
    return s;
}

}  // namespace

const KernelTable scalar_table{
    distances_scalar, exp_neg_scaled_scalar, dot_scalar, dot3_scalar, spectral_sums_scalar,
};

}  // namespace matern::simd::detail
