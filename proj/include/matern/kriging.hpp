#pragma once

// Kriging of the latent field and exact mean squared prediction errors
// under true or misspecified covariance parameters.

#include <Eigen/Dense>

#include <array>
#include <vector>

#include "matern/kernel.hpp"
#include "matern/linalg.hpp"

namespace matern {

/// What is being predicted at s0: the latent w(s0) or a new observation
/// y(s0) = w(s0) + eps(s0). The point prediction is the same; the y target
/// adds the nugget to every error variance.
enum class PredictionTarget { latent, observation };

/// Predictor built from one parameter set on one design. The factor of
/// Gamma = K_n + tau2 I is computed once and shared by all s0.
class KrigingPredictor {
public:
    KrigingPredictor(const NoisyModelParams& params, const LocationSet& locs);

    const NoisyModelParams& params() const { return params_; }
    const LocationSet& locations() const { return locs_; }

    /// Weights Gamma^{-1} gamma(s0).
    Eigen::VectorXd weights(const std::array<double, 3>& s0) const;
    /// Columns are the weights for each point.
    Eigen::MatrixXd weights(const std::vector<std::array<double, 3>>& points) const;

    double predict(const Eigen::VectorXd& y, const std::array<double, 3>& s0) const;

    /// MSPE this model asserts for its own predictor: sigma2 - gamma^T Gamma^{-1} gamma
    /// (plus tau2 for the observation target).
    double asserted_mspe(const std::array<double, 3>& s0,
                         PredictionTarget target = PredictionTarget::latent) const;

private:
    NoisyModelParams params_;
    LocationSet locs_;
    CovFactor factor_;
};

struct PredictionResult {
    double z_hat = 0.0;
    double mspe = 0.0;           // fit's predictor, error variance under truth
    double mspe_at_truth = 0.0;  // truth's predictor under truth
};

/// gamma^T Gamma^{-1} y with gamma free of the nugget.
double krig_predict(const NoisyModelParams& fit, const LocationSet& locs, const Eigen::VectorXd& y,
                    const std::array<double, 3>& s0);

/// Error variance under `truth` of the predictor built from `fit`:
/// sigma0^2 - 2 v^T gamma0 + v^T V0 v with v = Gamma_fit^{-1} gamma_fit.
double krig_mspe(const NoisyModelParams& fit, const NoisyModelParams& truth, const LocationSet& locs,
                 const std::array<double, 3>& s0, PredictionTarget target = PredictionTarget::latent);

/// The same quantity evaluated through prebuilt predictors (truth supplies V0).
double realized_mspe(const KrigingPredictor& fit, const NoisyModelParams& truth, const LocationSet& locs,
                     const std::array<double, 3>& s0, PredictionTarget target = PredictionTarget::latent);

struct MspeBatch {
    Eigen::VectorXd realized;  // fit's predictor under truth
    Eigen::VectorXd at_truth;  // truth's predictor under truth
    Eigen::VectorXd asserted;  // fit's own claim
};

/// All three error variances at many points with one factorization per model.
MspeBatch mspe_batch(const NoisyModelParams& fit, const NoisyModelParams& truth, const LocationSet& locs,
                     const std::vector<std::array<double, 3>>& points,
                     PredictionTarget target = PredictionTarget::latent);

struct EfficiencyRatios {
    double ratio_i = 1.0;   // realized MSPE of fit / MSPE at truth
    double ratio_ii = 1.0;  // MSPE asserted by fit / realized MSPE of fit
};

/// Throws DomainError when the truth MSPE is zero.
EfficiencyRatios efficiency_ratios(const NoisyModelParams& fit, const NoisyModelParams& truth,
                                   const LocationSet& locs, const std::array<double, 3>& s0);

/// (2 pi c)^{1/alpha} / (alpha sin(pi/alpha)) (delta tau2)^{1 - 1/alpha}.
double stein_grid_mse(double c, double alpha, double delta, double tau2);

}  // namespace matern
