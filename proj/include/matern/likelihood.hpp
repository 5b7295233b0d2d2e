#pragma once

// Gaussian negative log-likelihood l = log det V + y^T V^{-1} y (no 2 pi
// constant, no factor 1/2), its profile in (phi, eta), and the spectral path.

#include <Eigen/Dense>

#include "matern/kernel.hpp"
#include "matern/linalg.hpp"

namespace matern {

/// Observations on a fixed design. The pairwise distance matrix is computed
/// once and shared by every evaluation.
class GaussianData {
public:
    GaussianData(const LocationSet& locs, Eigen::VectorXd y);
    GaussianData(Eigen::MatrixXd distances, Eigen::VectorXd y);

    Index size() const { return y_.size(); }
    const Eigen::MatrixXd& distances() const { return dist_; }
    const Eigen::VectorXd& y() const { return y_; }

private:
    Eigen::MatrixXd dist_;
    Eigen::VectorXd y_;
};

struct LikelihoodEval {
    double value = 0.0;
    double grad_tau2 = 0.0;
    double grad_sigma2 = 0.0;
    double grad_phi = 0.0;
};

/// l and, if requested, its analytic partials in (tau2, sigma2, phi).
/// Non-PD V rethrows NotPositiveDefinite with the parameters in the message.
LikelihoodEval neg_loglik(const NoisyModelParams& params, const GaussianData& data,
                          bool gradient = true);
LikelihoodEval neg_loglik(const NoisyModelParams& params, const LocationSet& locs,
                          const Eigen::VectorXd& y);

/// Spectral form sum z_i^2 / (tau2 + sigma2 lambda_i) + sum log(tau2 + sigma2 lambda_i)
/// where lambda is the spectrum of the unit-sill correlation matrix and z = Q^T y.
/// Returns +inf when some denominator is not positive.
double neg_loglik_eigenpath(const NoisyModelParams& params, const EigenSpectrum& spectrum,
                            const Eigen::VectorXd& z);

struct EigenPathEval {
    double value = 0.0;
    double grad_tau2 = 0.0;
    double grad_sigma2 = 0.0;
};

/// Spectral form with its (tau2, sigma2) partials.
EigenPathEval neg_loglik_eigenpath_grad(double tau2, double sigma2, const EigenSpectrum& spectrum,
                                        const Eigen::VectorXd& z);

struct ProfileEval {
    double value = 0.0;
    double sigma2_hat = 0.0;
    double grad_phi = 0.0;
    double grad_eta = 0.0;
};

/// log det A + n log(sigma2_hat) + n with A = rho(phi) + eta I and
/// sigma2_hat = y^T A^{-1} y / n. For eta below 1e-8 the jitter policy applies.
ProfileEval profile_neg_loglik(double phi, double eta, double nu, const GaussianData& data,
                               bool gradient = false);
ProfileEval profile_neg_loglik(double phi, double eta, double nu, const LocationSet& locs,
                               const Eigen::VectorXd& y);

/// Log-likelihood on the plotting scale, -l / 2.
inline double loglik_plot_scale(double neg_loglik_value) { return -0.5 * neg_loglik_value; }

}  // namespace matern
