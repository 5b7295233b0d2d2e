#include "matern/kernel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "matern/error.hpp"
#include "matern/simd.hpp"
#include "matern/specialfn.hpp"

namespace matern {
namespace {

bool is_half(double nu) { return nu == 0.5; }

void require_positive(double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0) {
        throw DomainError(std::string(name) + " must be finite and positive, got " +
                          std::to_string(v));
    }
}

void require_distance(double dist) {
    if (!std::isfinite(dist) || dist < 0.0) {
        throw DomainError("distance must be finite and non-negative, got " + std::to_string(dist));
    }
}

// log of 1 / (Gamma(nu) 2^(nu-1)).
double log_norm(double nu) { return -log_gamma_fn(nu) - (nu - 1.0) * std::numbers::ln2; }

}  // namespace

double MaternParams::kappa() const { return sigma2 * std::pow(phi, 2.0 * nu); }

void MaternParams::validate() const {
    require_positive(sigma2, "sigma2");
    require_positive(phi, "phi");
    require_positive(nu, "nu");
}

double NoisyModelParams::eta() const { return tau2 / matern.sigma2; }

void NoisyModelParams::validate() const {
    matern.validate();
    if (!std::isfinite(tau2) || tau2 < 0.0) {
        throw DomainError("tau2 must be finite and non-negative, got " + std::to_string(tau2));
    }
}

double matern_correlation(double phi, double nu, double dist) {
    if (dist == 0.0) return 1.0;
    const double x = phi * dist;
    if (is_half(nu)) return std::exp(-x);
    const BesselEval k = bessel_k(nu, x);
    return std::exp(nu * std::log(x) + k.log_value + log_norm(nu));
}

double matern_correlation_dphi(double phi, double nu, double dist) {
    if (dist == 0.0) return 0.0;
    const double x = phi * dist;
    if (is_half(nu)) return -dist * std::exp(-x);
    // d/dx [x^nu K_nu(x)] = -x^nu K_{nu-1}(x), and K_{nu-1} = K_{|nu-1|}.
    const BesselEval k = bessel_k_nonneg(std::abs(nu - 1.0), x);
    return -dist * std::exp(nu * std::log(x) + k.log_value + log_norm(nu));
}

double matern_cov(const MaternParams& params, double dist) {
    params.validate();
    require_distance(dist);
    return params.sigma2 * matern_correlation(params.phi, params.nu, dist);
}

double noisy_cov(const NoisyModelParams& params, double dist, bool same_site) {
    params.validate();
    require_distance(dist);
    if (same_site && dist > 0.0) {
        throw DomainError("noisy_cov: same_site requires dist == 0");
    }
    const double w = params.matern.sigma2 * matern_correlation(params.matern.phi, params.matern.nu, dist);
    return same_site ? w + params.tau2 : w;
}

double spectral_constant(double nu, int d) {
    require_positive(nu, "nu");
    if (d < 1 || d > 3) throw DomainError("dimension must be 1, 2 or 3");
    const double half_d = 0.5 * static_cast<double>(d);
    return std::exp(log_gamma_fn(nu + half_d) - log_gamma_fn(nu) -
                    half_d * std::log(std::numbers::pi));
}

double spectral_density(const MaternParams& params, int d, double u) {
    params.validate();
    require_distance(u);
    const double c = spectral_constant(params.nu, d);
    const double expo = params.nu + 0.5 * static_cast<double>(d);
    const double phi2 = params.phi * params.phi;
    return c * params.sigma2 * std::pow(params.phi, 2.0 * params.nu) / std::pow(phi2 + u * u, expo);
}

double phi_from_effective_range(double range, double nu, double level) {
    require_positive(range, "range");
    require_positive(nu, "nu");
    if (!(level > 0.0 && level < 1.0)) throw DomainError("level must lie in (0, 1)");

    // The unit-sill correlation depends on phi * range only; solve rho(x) = level in x.
    auto g = [nu, level](double x) { return matern_correlation(1.0, nu, x) - level; };
    double lo = 1e-8;
    double hi = 1.0;
    int expansions = 0;
    while (g(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++expansions > 60) {
            std::ostringstream msg;
            msg << "phi_from_effective_range: no bracket for level " << level << " (nu=" << nu
                << ", last x=" << hi << ", rho-level=" << g(hi) << ")";
            throw NumericError(msg.str());
        }
    }
    if (g(lo) < 0.0) {
        std::ostringstream msg;
        msg << "phi_from_effective_range: correlation already below " << level << " at x=" << lo;
        throw NumericError(msg.str());
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi) / range;
}

void matern_correlation_batch(double phi, double nu, std::span<const double> dists,
                              std::span<double> out) {
    if (is_half(nu)) {
        simd::exp_neg_scaled(dists, phi, out);
        return;
    }
    const double ln = log_norm(nu);
    for (std::size_t j = 0; j < dists.size(); ++j) {
        const double dist = dists[j];
        if (dist == 0.0) {
            out[j] = 1.0;
            continue;
        }
        const double x = phi * dist;
        out[j] = std::exp(nu * std::log(x) + bessel_k(nu, x).log_value + ln);
    }
}

void matern_correlation_dphi_batch(double phi, double nu, std::span<const double> dists,
                                   std::span<double> out) {
    if (is_half(nu)) {
        simd::exp_neg_scaled(dists, phi, out);
        for (std::size_t j = 0; j < dists.size(); ++j) out[j] *= -dists[j];
        return;
    }
    const double ln = log_norm(nu);
    const double order = std::abs(nu - 1.0);
    for (std::size_t j = 0; j < dists.size(); ++j) {
        const double dist = dists[j];
        if (dist == 0.0) {
            out[j] = 0.0;
            continue;
        }
        const double x = phi * dist;
        out[j] = -dist * std::exp(nu * std::log(x) + bessel_k_nonneg(order, x).log_value + ln);
    }
}

}  // namespace matern
