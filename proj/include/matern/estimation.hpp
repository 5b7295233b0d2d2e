#pragma once

// Maximum-likelihood fits: (tau2, sigma2) at a fixed decay, the joint
// profile fit over (phi, eta), and the profile fit with eta pinned to 0.

#include <Eigen/Dense>

#include <string>
#include <string_view>

#include "matern/error.hpp"
#include "matern/likelihood.hpp"
#include "matern/linalg.hpp"

namespace matern {

enum class FitMode { profile, fixed_phi, no_nugget };

std::string_view fit_mode_name(FitMode mode);
/// Accepts "profile", "fixed-phi"/"fixed_phi", "no-nugget"/"no_nugget".
FitMode parse_fit_mode(std::string_view name);

/// Search box D = [tau2_lo, tau2_hi] x [sigma2_lo, sigma2_hi].
struct Box2 {
    double tau2_lo = 1e-4;
    double tau2_hi = 1.0;
    double sigma2_lo = 1e-4;
    double sigma2_hi = 1.0;

    void validate() const;
};

/// [1e-4, 10 var(y)]^2, with the upper end raised to 1e-3 for near-constant y.
Box2 default_box(const Eigen::VectorXd& y);

struct FitOptions {
    int max_iter = 500;
    double gtol = 1e-6;
    double ftol = 1e-10;
    double eta_min = 1e-12;
    double eta_max = 1e4;
    /// Decay bounds come from effective ranges in [range_min, range_max].
    double range_min = 0.002;
    double range_max = 20.0;
    /// Profile fits evaluate every start and refine the best `refine_top`.
    int refine_top = 2;
};

struct FitResult {
    FitMode mode = FitMode::profile;
    double nu = 0.5;
    double tau2_hat = 0.0;
    double sigma2_hat = 0.0;
    double phi_hat = 0.0;
    double kappa_hat = 0.0;
    double eta_hat = 0.0;
    double neg_loglik = 0.0;
    bool converged = false;
    bool hit_boundary = false;
    int n_evals = 0;
    int iterations = 0;
    /// Projected gradient norm in the optimizer's log coordinates.
    double grad_norm = 0.0;
    int starts = 0;
    int starts_converged = 0;
    Box2 box;  // fixed_phi only
    std::string message;
};

/// Thrown when no start converges; carries the best point reached.
class FitFailure : public EstimationError {
public:
    FitFailure(FitResult best, const std::string& what) : EstimationError(what), best_(std::move(best)) {}
    const FitResult& best() const { return best_; }

private:
    FitResult best_;
};

/// argmin over D of l(tau2, sigma2, phi1) through the spectral path of rho(phi1).
FitResult fit_fixed_phi(double phi1, double nu, const Box2& box, const LocationSet& locs,
                        const Eigen::VectorXd& y, const FitOptions& options = {});
/// Same, reusing an eigendecomposition of rho(phi1).
FitResult fit_fixed_phi(double phi1, double nu, const Box2& box, const EigenDecomposition& eig,
                        const Eigen::VectorXd& y, const FitOptions& options = {});

/// Profile fit over (log phi, log eta); sigma2 in closed form, tau2 = eta sigma2.
FitResult fit_profile(double nu, const GaussianData& data, const FitOptions& options = {});
FitResult fit_profile(double nu, const LocationSet& locs, const Eigen::VectorXd& y,
                      const FitOptions& options = {});

/// Profile fit with eta = 0.
FitResult fit_no_nugget(double nu, const GaussianData& data, const FitOptions& options = {});
FitResult fit_no_nugget(double nu, const LocationSet& locs, const Eigen::VectorXd& y,
                        const FitOptions& options = {});

/// Nugget share tau2 / (tau2 + sigma2) suggested by half the mean squared
/// nearest-neighbour difference over the sample variance, clipped to [0.01, 0.99].
double nugget_fraction_guess(const GaussianData& data);

}  // namespace matern
