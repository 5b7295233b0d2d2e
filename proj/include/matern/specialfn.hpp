#pragma once

namespace matern {

/// Modified Bessel function of the second kind evaluated at (nu, x).
struct BesselEval {
    double nu = 0.0;
    double x = 0.0;
    double value = 0.0;      // K_nu(x); underflows to 0 for large x
    double log_value = 0.0;  // log K_nu(x); finite for x up to ~700 and beyond
};

/// Gamma function for z > 0. Throws DomainError for z <= 0 or non-finite z,
/// OverflowError once Gamma(z) exceeds the double range (z > ~171.6).
double gamma_fn(double z);

/// log Gamma(z) for z > 0.
double log_gamma_fn(double z);

/// K_nu(x) for nu > 0, x > 0. Temme series for x <= 2, Steed's continued
/// fraction above, then upward recurrence in the order.
BesselEval bessel_k(double nu, double x);

/// Same algorithm but also accepts nu = 0 (K_{-nu} = K_nu); used by the
/// Matern derivative with respect to the decay parameter.
BesselEval bessel_k_nonneg(double nu, double x);

}  // namespace matern
