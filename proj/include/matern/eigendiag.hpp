#pragma once

// Diagnostics on kernel-matrix spectra: the decay law
// lambda_i ~ A n i^{-2nu/d - 1}, the weighted spectral sums that set the
// asymptotic variances of the estimators, and score residuals of a fit.

#include <Eigen/Dense>

#include <vector>

#include "matern/estimation.hpp"
#include "matern/linalg.hpp"

namespace matern {

/// Largest n accepted by the dense eigensolver in decay scans.
inline constexpr Index kMaxDenseEigenN = 6000;

struct DecayReport {
    Index n = 0;
    int d = 1;
    double nu = 0.5;
    std::vector<double> alphas;   // exponent that produced each index
    std::vector<Index> indices;   // 1-based, strictly increasing
    std::vector<double> lambdas;
    std::vector<double> ratios;   // lambda_i / (n i^{-2nu/d - 1})
    double max_ratio_all = 0.0;   // max over every i of the full spectrum
    double ratio_first = 0.0;     // i = 1
    double ratio_last = 0.0;      // i = n
    EigenSpectrum spectrum;       // full spectrum the report was read from
};

struct DecayScanSpec {
    double nu = 0.9;
    double sigma2 = 1.0;
    double phi = 1.0;
    int d = 1;
    std::vector<Index> n_list;
    std::vector<double> alpha_list{0.5, 0.75, 0.9};
};

/// i = round(n^alpha) with ties rounded down, clamped to [1, n].
Index decay_index(Index n, double alpha);

/// lambda / (n i^{-2nu/d - 1}).
double decay_ratio(double lambda, Index n, Index i, double nu, int d);

/// Full spectra of sigma2 rho(phi) on regular grids of each n (no nugget).
/// Consecutive duplicate indices (tiny n) are kept once.
std::vector<DecayReport> decay_scan(const DecayScanSpec& spec, int threads = 1);

/// Report from an already computed spectrum.
DecayReport decay_report(const EigenSpectrum& spectrum, double nu, int d, const std::vector<double>& alphas);

struct LemmaSums {
    double sum_a2 = 0.0;      // sum a_i^2, a_i = 1 / (tau2 + sigma2 lambda_i)
    double sum_a4 = 0.0;      // sum a_i^4
    double sum_lam_a2 = 0.0;  // sum lambda_i a_i^2
    double sum_b = 0.0;       // sum b_i, b_i = lambda_i a_i
    double sum_b2 = 0.0;      // sum b_i^2
    double c1_hat = 0.0;      // sum_a2 / n
    double c2_hat = 0.0;      // sum_a4 / n
    double c3_hat = 0.0;      // sum_b2 / n^{1/(1 + 2nu/d)}
};

/// `spectrum` is that of the unit-sill correlation matrix.
LemmaSums lemma_sums(double tau2, double sigma2, const EigenSpectrum& spectrum, double nu, int d);

struct CltSd {
    double sd_tau2 = 0.0;   // tau2_0 sqrt(2 c2) / (c1 sqrt(n))
    double sd_kappa = 0.0;  // phi1^{2nu} sqrt(2 / c3) n^{-1/(2 + 4nu/d)}
};

/// Throws NumericError on non-positive c estimates.
CltSd clt_predicted_sd(const LemmaSums& lemma, double tau2_0, double phi1, double nu, int d, Index n);

struct ScoreResiduals {
    double resid_tau2 = 0.0;    // sum z^2 a^2 - sum a     = -dl/dtau2
    double resid_sigma2 = 0.0;  // sum z^2 lambda a^2 - sum b = -dl/dsigma2
};

/// Stationarity equations of l in (tau2, sigma2) at (tau2, sigma2) with z = Q^T y.
ScoreResiduals score_residuals(double tau2, double sigma2, const EigenSpectrum& spectrum,
                               const Eigen::VectorXd& z);
/// At the fit's own estimates.
ScoreResiduals score_residuals(const FitResult& fit, const EigenSpectrum& spectrum, const Eigen::VectorXd& z);

}  // namespace matern
