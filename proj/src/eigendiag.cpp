#include "matern/eigendiag.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "matern/error.hpp"
#include "matern/parallel.hpp"
#include "matern/simstudy.hpp"

namespace matern {

Index decay_index(Index n, double alpha) {
    if (n < 1) throw DomainError("decay_index: n must be positive");
    const double x = std::pow(static_cast<double>(n), alpha);
    double r = std::floor(x);
    if (x - r > 0.5) r += 1.0;
    return std::clamp(static_cast<Index>(r), Index{1}, n);
}

double decay_ratio(double lambda, Index n, Index i, double nu, int d) {
    return lambda / (static_cast<double>(n) * std::pow(static_cast<double>(i), -2.0 * nu / d - 1.0));
}

DecayReport decay_report(const EigenSpectrum& spectrum, double nu, int d, const std::vector<double>& alphas) {
    DecayReport r;
    r.n = spectrum.size();
    r.d = d;
    r.nu = nu;
    if (r.n == 0) throw DomainError("decay_report: empty spectrum");
    for (double a : alphas) {
        const Index i = decay_index(r.n, a);
        if (!r.indices.empty() && i <= r.indices.back()) continue;
        const double lam = spectrum.values(i - 1);
        r.alphas.push_back(a);
        r.indices.push_back(i);
        r.lambdas.push_back(lam);
        r.ratios.push_back(decay_ratio(lam, r.n, i, nu, d));
    }
    for (Index i = 1; i <= r.n; ++i)
        r.max_ratio_all = std::max(r.max_ratio_all, decay_ratio(spectrum.values(i - 1), r.n, i, nu, d));
    r.ratio_first = decay_ratio(spectrum.values(0), r.n, 1, nu, d);
    r.ratio_last = decay_ratio(spectrum.values(r.n - 1), r.n, r.n, nu, d);
    r.spectrum = spectrum;
    return r;
}

std::vector<DecayReport> decay_scan(const DecayScanSpec& spec, int threads) {
    if (!(spec.nu > 0.0) || !(spec.sigma2 > 0.0) || !(spec.phi > 0.0))
        throw DomainError("decay_scan: nu, sigma2 and phi must be positive");
    std::vector<double> alphas = spec.alpha_list;
    std::sort(alphas.begin(), alphas.end());
    for (Index n : spec.n_list) {
        if (n > kMaxDenseEigenN)
            throw DomainError("decay_scan: n=" + std::to_string(n) + " exceeds the dense eigensolver limit " +
                              std::to_string(kMaxDenseEigenN));
    }
    std::vector<DecayReport> out(spec.n_list.size());
    parallel_for(out.size(), threads, [&](std::size_t k) {
        const LocationSet locs = make_design(DesignSpec{DesignKind::regular_grid, spec.d, spec.n_list[k], 0});
        Eigen::MatrixXd kmat = correlation_matrix(spec.phi, spec.nu, distance_matrix(locs));
        kmat *= spec.sigma2;
        out[k] = decay_report(eigen_sym(kmat), spec.nu, spec.d, alphas);
    });
    return out;
}

LemmaSums lemma_sums(double tau2, double sigma2, const EigenSpectrum& spectrum, double nu, int d) {
    if (!(tau2 > 0.0) || !(sigma2 > 0.0)) throw DomainError("lemma_sums: tau2 and sigma2 must be positive");
    LemmaSums s;
    const Index n = spectrum.size();
    if (n == 0) throw DomainError("lemma_sums: empty spectrum");
    for (Index i = 0; i < n; ++i) {
        const double lam = std::max(spectrum.values(i), 0.0);
        const double a = 1.0 / (tau2 + sigma2 * lam);
        const double b = lam * a;
        s.sum_a2 += a * a;
        s.sum_a4 += a * a * a * a;
        s.sum_lam_a2 += lam * a * a;
        s.sum_b += b;
        s.sum_b2 += b * b;
    }
    const double nd = static_cast<double>(n);
    s.c1_hat = s.sum_a2 / nd;
    s.c2_hat = s.sum_a4 / nd;
    s.c3_hat = s.sum_b2 / std::pow(nd, 1.0 / (1.0 + 2.0 * nu / d));
    return s;
}

CltSd clt_predicted_sd(const LemmaSums& lemma, double tau2_0, double phi1, double nu, int d, Index n) {
    if (!(lemma.c1_hat > 0.0) || !(lemma.c2_hat > 0.0) || !(lemma.c3_hat > 0.0))
        throw NumericError("clt_predicted_sd: c estimates must be positive (c1=" + std::to_string(lemma.c1_hat) +
                           ", c2=" + std::to_string(lemma.c2_hat) + ", c3=" + std::to_string(lemma.c3_hat) + ")");
    const double nd = static_cast<double>(n);
    CltSd out;
    out.sd_tau2 = tau2_0 * std::sqrt(2.0 * lemma.c2_hat) / (lemma.c1_hat * std::sqrt(nd));
    out.sd_kappa = std::pow(phi1, 2.0 * nu) * std::sqrt(2.0 / lemma.c3_hat) * std::pow(nd, -1.0 / (2.0 + 4.0 * nu / d));
    return out;
}

ScoreResiduals score_residuals(double tau2, double sigma2, const EigenSpectrum& spectrum, const Eigen::VectorXd& z) {
    if (spectrum.size() != z.size()) throw DomainError("score_residuals: spectrum and z lengths differ");
    ScoreResiduals r;
    for (Index i = 0; i < z.size(); ++i) {
        const double lam = spectrum.values(i);
        const double a = 1.0 / (tau2 + sigma2 * lam);
        const double z2 = z(i) * z(i);
        r.resid_tau2 += z2 * a * a - a;
        r.resid_sigma2 += z2 * lam * a * a - lam * a;
    }
    return r;
}

ScoreResiduals score_residuals(const FitResult& fit, const EigenSpectrum& spectrum, const Eigen::VectorXd& z) {
    return score_residuals(fit.tau2_hat, fit.sigma2_hat, spectrum, z);
}

}  // namespace matern
