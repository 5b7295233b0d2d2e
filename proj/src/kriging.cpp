#include "matern/kriging.hpp"

#include <cmath>
#include <numbers>

#include "matern/error.hpp"

namespace matern {
namespace {

double nugget_term(const NoisyModelParams& p, PredictionTarget target) {
    return target == PredictionTarget::observation ? p.tau2 : 0.0;
}

Eigen::MatrixXd cross_cov_matrix(const MaternParams& params, const LocationSet& locs,
                                 const std::vector<std::array<double, 3>>& points) {
    Eigen::MatrixXd g(locs.size(), static_cast<Index>(points.size()));
    for (std::size_t j = 0; j < points.size(); ++j) g.col(static_cast<Index>(j)) = cross_cov(params, locs, points[j]);
    return g;
}

}  // namespace

KrigingPredictor::KrigingPredictor(const NoisyModelParams& params, const LocationSet& locs)
    : params_(params), locs_(locs) {
    params_.validate();
    if (locs_.size() > 0) {
        factor_ = params_.tau2 > 0.0 ? cholesky(build_cov_matrix(params_, locs_))
                                     : cholesky_with_jitter(build_cov_matrix(params_, locs_), params_.matern.sigma2);
    }
}

Eigen::VectorXd KrigingPredictor::weights(const std::array<double, 3>& s0) const {
    if (locs_.size() == 0) return Eigen::VectorXd();
    return solve_with_factor(factor_, cross_cov(params_.matern, locs_, s0));
}

Eigen::MatrixXd KrigingPredictor::weights(const std::vector<std::array<double, 3>>& points) const {
    if (locs_.size() == 0) return Eigen::MatrixXd(0, static_cast<Index>(points.size()));
    return solve_with_factor(factor_, cross_cov_matrix(params_.matern, locs_, points));
}

double KrigingPredictor::predict(const Eigen::VectorXd& y, const std::array<double, 3>& s0) const {
    if (y.size() != locs_.size()) throw DomainError("KrigingPredictor::predict: y length differs from design");
    if (locs_.size() == 0) return 0.0;
    return weights(s0).dot(y);
}

double KrigingPredictor::asserted_mspe(const std::array<double, 3>& s0, PredictionTarget target) const {
    const double base = params_.matern.sigma2 + nugget_term(params_, target);
    if (locs_.size() == 0) return base;
    const Eigen::VectorXd g = cross_cov(params_.matern, locs_, s0);
    return base - g.dot(solve_with_factor(factor_, g));
}

double krig_predict(const NoisyModelParams& fit, const LocationSet& locs, const Eigen::VectorXd& y,
                    const std::array<double, 3>& s0) {
    return KrigingPredictor(fit, locs).predict(y, s0);
}

double realized_mspe(const KrigingPredictor& fit, const NoisyModelParams& truth, const LocationSet& locs,
                     const std::array<double, 3>& s0, PredictionTarget target) {
    truth.validate();
    const double base = truth.matern.sigma2 + nugget_term(truth, target);
    if (locs.size() == 0) return base;
    const Eigen::VectorXd v = fit.weights(s0);
    const Eigen::VectorXd g0 = cross_cov(truth.matern, locs, s0);
    const Eigen::MatrixXd v0 = build_cov_matrix(truth, locs);
    return base - 2.0 * v.dot(g0) + v.dot(v0 * v);
}

double krig_mspe(const NoisyModelParams& fit, const NoisyModelParams& truth, const LocationSet& locs,
                 const std::array<double, 3>& s0, PredictionTarget target) {
    return realized_mspe(KrigingPredictor(fit, locs), truth, locs, s0, target);
}

MspeBatch mspe_batch(const NoisyModelParams& fit, const NoisyModelParams& truth, const LocationSet& locs,
                     const std::vector<std::array<double, 3>>& points, PredictionTarget target) {
    const auto m = static_cast<Index>(points.size());
    MspeBatch out;
    const double base0 = truth.matern.sigma2 + nugget_term(truth, target);
    const double base1 = fit.matern.sigma2 + nugget_term(fit, target);
    if (locs.size() == 0) {
        truth.validate();
        fit.validate();
        out.realized = Eigen::VectorXd::Constant(m, base0);
        out.at_truth = out.realized;
        out.asserted = Eigen::VectorXd::Constant(m, base1);
        return out;
    }
    const KrigingPredictor p0(truth, locs);
    const Eigen::MatrixXd g0 = cross_cov_matrix(truth.matern, locs, points);
    const Eigen::MatrixXd w0 = p0.weights(points);
    out.at_truth = base0 - (g0.array() * w0.array()).colwise().sum().transpose();

    const KrigingPredictor p1(fit, locs);
    const Eigen::MatrixXd g1 = cross_cov_matrix(fit.matern, locs, points);
    const Eigen::MatrixXd w1 = p1.weights(points);
    out.asserted = base1 - (g1.array() * w1.array()).colwise().sum().transpose();
    const Eigen::MatrixXd vw = build_cov_matrix(truth, locs) * w1;
    out.realized = (base0 - 2.0 * (w1.array() * g0.array()).colwise().sum() +
                    (w1.array() * vw.array()).colwise().sum())
                       .transpose();
    return out;
}

EfficiencyRatios efficiency_ratios(const NoisyModelParams& fit, const NoisyModelParams& truth,
                                   const LocationSet& locs, const std::array<double, 3>& s0) {
    const auto b = mspe_batch(fit, truth, locs, {s0});
    if (!(b.at_truth(0) > 0.0)) throw DomainError("efficiency_ratios: MSPE at truth is zero");
    if (!(b.realized(0) > 0.0)) throw DomainError("efficiency_ratios: realized MSPE is zero");
    return {b.realized(0) / b.at_truth(0), b.asserted(0) / b.realized(0)};
}

double stein_grid_mse(double c, double alpha, double delta, double tau2) {
    if (!(alpha > 1.0) || !std::isfinite(alpha)) throw DomainError("stein_grid_mse: alpha must exceed 1");
    if (!(c > 0.0) || !(delta > 0.0) || !(tau2 > 0.0))
        throw DomainError("stein_grid_mse: c, delta and tau2 must be positive");
    const double pi = std::numbers::pi;
    return std::pow(2.0 * pi * c, 1.0 / alpha) / (alpha * std::sin(pi / alpha)) *
           std::pow(delta * tau2, 1.0 - 1.0 / alpha);
}

}  // namespace matern
