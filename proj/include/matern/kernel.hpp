#pragma once

#include <span>

namespace matern {

/// Matern covariogram parameters: partial sill sigma2, decay phi, smoothness nu.
struct MaternParams {
    double sigma2 = 1.0;
    double phi = 1.0;
    double nu = 0.5;

    /// Microergodic parameter sigma2 * phi^(2 nu).
    double kappa() const;
    /// Throws DomainError unless every field is finite and strictly positive.
    void validate() const;
};

/// Matern covariogram plus a white-noise nugget tau2 >= 0.
struct NoisyModelParams {
    MaternParams matern;
    double tau2 = 0.0;

    /// Noise-to-signal ratio tau2 / sigma2.
    double eta() const;
    void validate() const;
};

/// Matern correlation rho(dist) = (phi d)^nu K_nu(phi d) / (Gamma(nu) 2^(nu-1)), rho(0) = 1.
/// nu = 1/2 takes the exp(-phi d) fast path.
double matern_correlation(double phi, double nu, double dist);

/// d rho / d phi at `dist`.
double matern_correlation_dphi(double phi, double nu, double dist);

/// sigma2 * matern_correlation. Throws DomainError for negative or non-finite dist.
double matern_cov(const MaternParams& params, double dist);

/// Covariogram with the nugget attached to site identity: same_site adds tau2.
/// same_site with dist > 0 is a DomainError.
double noisy_cov(const NoisyModelParams& params, double dist, bool same_site);

/// Spectral density f(u) = C sigma2 phi^(2nu) / (phi^2 + u^2)^(nu + d/2) with
/// C = Gamma(nu + d/2) / (Gamma(nu) pi^(d/2)), so that the d-dimensional
/// Fourier transform of f reproduces matern_cov.
double spectral_density(const MaternParams& params, int d, double u);

/// The constant C above.
double spectral_constant(double nu, int d);

/// Decay phi at which the unit-sill correlation equals `level` at distance `range`.
double phi_from_effective_range(double range, double nu, double level = 0.05);

/// Batch form: out[j] = matern_correlation(phi, nu, dists[j]).
void matern_correlation_batch(double phi, double nu, std::span<const double> dists,
                              std::span<double> out);

/// Batch form of matern_correlation_dphi.
void matern_correlation_dphi_batch(double phi, double nu, std::span<const double> dists,
                                   std::span<double> out);

}  // namespace matern
