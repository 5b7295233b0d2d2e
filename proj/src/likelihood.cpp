#include "matern/likelihood.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "matern/error.hpp"
#include "matern/simd.hpp"

namespace matern {
namespace {

void check_length(const GaussianData& data) {
    if (data.distances().rows() != data.size() || data.distances().cols() != data.size())
        throw DomainError("likelihood: distance matrix and data length disagree");
    if (data.size() == 0) throw DomainError("likelihood: no observations");
}

std::span<const double> flat(const Eigen::MatrixXd& m) {
    return {m.data(), static_cast<std::size_t>(m.size())};
}

std::span<const double> flat(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

CovFactor factor_or_rethrow(const Eigen::MatrixXd& m, const std::string& where, bool jitter) {
    try {
        return jitter ? cholesky_with_jitter(m, 1.0) : cholesky(m);
    } catch (const NotPositiveDefinite& e) {
        throw NotPositiveDefinite(e.pivot(), where + ": " + e.what());
    }
}

std::string describe(const NoisyModelParams& p) {
    std::ostringstream os;
    os.precision(17);
    os << "neg_loglik(tau2=" << p.tau2 << ", sigma2=" << p.matern.sigma2 << ", phi=" << p.matern.phi
       << ", nu=" << p.matern.nu << ")";
    return os.str();
}

// tr(A^{-1} D) for symmetric D, as an elementwise product sum.
double trace_product(const Eigen::MatrixXd& inv, const Eigen::MatrixXd& d) {
    return simd::dot(flat(inv), flat(d));
}

}  // namespace

GaussianData::GaussianData(const LocationSet& locs, Eigen::VectorXd y)
    : dist_(distance_matrix(locs)), y_(std::move(y)) {
    check_length(*this);
}

GaussianData::GaussianData(Eigen::MatrixXd distances, Eigen::VectorXd y)
    : dist_(std::move(distances)), y_(std::move(y)) {
    check_length(*this);
}

LikelihoodEval neg_loglik(const NoisyModelParams& params, const GaussianData& data, bool gradient) {
    params.validate();
    const Index n = data.size();
    const auto& m = params.matern;
    const Eigen::MatrixXd rho = correlation_matrix(m.phi, m.nu, data.distances());
    Eigen::MatrixXd v = m.sigma2 * rho;
    v.diagonal().array() += params.tau2;
    const CovFactor f = factor_or_rethrow(v, describe(params), false);
    const Eigen::VectorXd alpha = solve_with_factor(f, data.y());

    LikelihoodEval out;
    out.value = f.logdet + simd::dot(flat(data.y()), flat(alpha));
    if (!gradient) return out;

    const Eigen::MatrixXd inv = inverse_from_factor(f);
    const double tr_inv = inv.trace();
    const double aa = simd::dot(flat(alpha), flat(alpha));
    const Eigen::VectorXd rho_alpha = rho * alpha;
    // sigma2 rho = V - tau2 I, so tr(V^{-1} rho) = (n - tau2 tr V^{-1}) / sigma2.
    out.grad_tau2 = tr_inv - aa;
    out.grad_sigma2 = (static_cast<double>(n) - params.tau2 * tr_inv) / m.sigma2 -
                      simd::dot(flat(alpha), flat(rho_alpha));
    const Eigen::MatrixXd drho = correlation_dphi_matrix(m.phi, m.nu, data.distances());
    const Eigen::VectorXd drho_alpha = drho * alpha;
    out.grad_phi = m.sigma2 * (trace_product(inv, drho) - simd::dot(flat(alpha), flat(drho_alpha)));
    return out;
}

LikelihoodEval neg_loglik(const NoisyModelParams& params, const LocationSet& locs,
                          const Eigen::VectorXd& y) {
    if (y.size() != locs.size()) throw DomainError("neg_loglik: y length differs from location count");
    return neg_loglik(params, GaussianData(locs, y), true);
}

double neg_loglik_eigenpath(const NoisyModelParams& params, const EigenSpectrum& spectrum,
                            const Eigen::VectorXd& z) {
    if (spectrum.size() != z.size()) throw DomainError("neg_loglik_eigenpath: spectrum and z lengths differ");
    const Eigen::VectorXd z2 = z.array().square();
    const auto s = simd::spectral_sums(flat(spectrum.values), flat(z2), params.tau2, params.matern.sigma2);
    if (!std::isfinite(s.logdet) || !std::isfinite(s.quad)) return std::numeric_limits<double>::infinity();
    return s.quad + s.logdet;
}

EigenPathEval neg_loglik_eigenpath_grad(double tau2, double sigma2, const EigenSpectrum& spectrum,
                                        const Eigen::VectorXd& z) {
    if (spectrum.size() != z.size())
        throw DomainError("neg_loglik_eigenpath_grad: spectrum and z lengths differ");
    EigenPathEval out;
    const Index n = z.size();
    for (Index i = 0; i < n; ++i) {
        const double lam = spectrum.values(i);
        const double den = tau2 + sigma2 * lam;
        if (!(den > 0.0)) {
            out.value = std::numeric_limits<double>::infinity();
            return out;
        }
        const double a = 1.0 / den;
        const double z2 = z(i) * z(i);
        out.value += z2 * a + std::log(den);
        const double g = a - z2 * a * a;
        out.grad_tau2 += g;
        out.grad_sigma2 += lam * g;
    }
    return out;
}

ProfileEval profile_neg_loglik(double phi, double eta, double nu, const GaussianData& data,
                               bool gradient) {
    if (!(phi > 0.0) || !std::isfinite(phi)) throw DomainError("profile_neg_loglik: phi must be positive");
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw DomainError("profile_neg_loglik: eta must be non-negative");
    const Index n = data.size();
    const double nd = static_cast<double>(n);
    Eigen::MatrixXd a = correlation_matrix(phi, nu, data.distances());
    a.diagonal().array() += eta;
    std::ostringstream where;
    where.precision(17);
    where << "profile_neg_loglik(phi=" << phi << ", eta=" << eta << ")";
    const CovFactor f = factor_or_rethrow(a, where.str(), eta < 1e-8);
    const Eigen::VectorXd alpha = solve_with_factor(f, data.y());
    const double quad = simd::dot(flat(data.y()), flat(alpha));
    if (!(quad > 0.0)) throw NumericError(where.str() + ": y^T A^{-1} y is not positive");

    ProfileEval out;
    out.sigma2_hat = quad / nd;
    out.value = f.logdet + nd * std::log(out.sigma2_hat) + nd;
    if (!gradient) return out;

    const Eigen::MatrixXd inv = inverse_from_factor(f);
    out.grad_eta = inv.trace() - simd::dot(flat(alpha), flat(alpha)) / out.sigma2_hat;
    const Eigen::MatrixXd drho = correlation_dphi_matrix(phi, nu, data.distances());
    const Eigen::VectorXd drho_alpha = drho * alpha;
    out.grad_phi = trace_product(inv, drho) - simd::dot(flat(alpha), flat(drho_alpha)) / out.sigma2_hat;
    return out;
}

ProfileEval profile_neg_loglik(double phi, double eta, double nu, const LocationSet& locs,
                               const Eigen::VectorXd& y) {
    if (y.size() != locs.size())
        throw DomainError("profile_neg_loglik: y length differs from location count");
    return profile_neg_loglik(phi, eta, nu, GaussianData(locs, y), false);
}

}  // namespace matern
