#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "matern/eigendiag.hpp"
#include "matern/error.hpp"
#include "matern/likelihood.hpp"
#include "matern/simstudy.hpp"

using namespace matern;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

EigenSpectrum grid_spectrum(Index n, double phi, double nu) {
    const auto locs = make_design(DesignSpec{DesignKind::regular_grid, 1, n, 0});
    return eigen_sym(correlation_matrix(phi, nu, distance_matrix(locs)));
}

double median(std::vector<double> v) { return percentile(std::move(v), 0.5); }

}  // namespace

TEST_CASE("decay index rounds to the nearest index and clamps") {
    CHECK(decay_index(100, 0.5) == 10);
    CHECK(decay_index(1, 0.75) == 1);
    CHECK(decay_index(1000, 0.75) == 178);  // 177.83
    CHECK(decay_index(1000, 1.0) == 1000);
    CHECK(decay_index(1000, 0.0) == 1);
    CHECK(decay_index(42, 0.5) == 6);  // 6.48
    CHECK_THROWS_AS(decay_index(0, 0.5), DomainError);
}

TEST_CASE("single point spectrum gives the sill") {
    DecayScanSpec s;
    s.sigma2 = 2.5;
    s.n_list = {1};
    const auto r = decay_scan(s);
    REQUIRE(r.size() == 1);
    REQUIRE(r[0].ratios.size() == 1);
    CHECK(r[0].ratios[0] == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(r[0].indices[0] == 1);
}

TEST_CASE("decay scan rejects sizes beyond the dense limit") {
    DecayScanSpec s;
    s.n_list = {kMaxDenseEigenN + 1};
    CHECK_THROWS_AS(decay_scan(s), DomainError);
}

TEST_CASE("decay scan laws") {
    DecayScanSpec s;
    s.nu = 0.9;
    s.n_list = {250, 500, 1000, 2000};
    const auto r = decay_scan(s, 2);
    REQUIRE(r.size() == 4);
    for (const auto& rep : r) {
        CHECK(std::is_sorted(rep.indices.begin(), rep.indices.end()));
        CHECK(std::adjacent_find(rep.indices.begin(), rep.indices.end()) == rep.indices.end());
        CHECK(rep.indices.front() >= 1);
        CHECK(rep.indices.back() <= rep.n);
        for (double q : rep.ratios) CHECK(q > 0.0);
        // Endpoints stay away from zero relative to the sampled ratios.
        CHECK(rep.ratio_first > 0.01 * median(rep.ratios));
        CHECK(rep.ratio_last > 0.01 * median(rep.ratios));
    }
    SUBCASE("uniform upper bound") {
        CHECK(r[3].max_ratio_all <= 2.0 * r[2].max_ratio_all);
        CHECK(r[2].max_ratio_all <= 2.0 * r[1].max_ratio_all);
    }
    SUBCASE("ratio at i = n^0.75 flattens as n doubles") {
        auto at = [&](std::size_t k) {
            const auto& rep = r[k];
            const auto it = std::find(rep.alphas.begin(), rep.alphas.end(), 0.75);
            REQUIRE(it != rep.alphas.end());
            return rep.ratios[static_cast<std::size_t>(it - rep.alphas.begin())];
        };
        const double d1 = std::abs(at(1) / at(0) - 1.0);
        const double d2 = std::abs(at(2) / at(1) - 1.0);
        const double d3 = std::abs(at(3) / at(2) - 1.0);
        CHECK(d2 < d1);
        CHECK(d3 < d2);
        CHECK(d3 < 0.05);
    }
}

TEST_CASE("spectral sums by hand") {
    SUBCASE("zero spectrum") {
        EigenSpectrum s{VectorXd::Zero(7)};
        const auto l = lemma_sums(0.5, 1.0, s, 0.5, 1);
        CHECK(l.sum_a2 == doctest::Approx(7.0 / 0.25));
        CHECK(l.sum_b == 0.0);
        CHECK(l.sum_b2 == 0.0);
    }
    SUBCASE("two eigenvalues") {
        EigenSpectrum s{Eigen::Vector2d(1.0, 0.0)};
        const auto l = lemma_sums(1.0, 1.0, s, 0.5, 1);
        CHECK(l.sum_a2 == doctest::Approx(1.25).epsilon(1e-15));
        CHECK(l.sum_a4 == doctest::Approx(1.0 / 16 + 1.0).epsilon(1e-15));
        CHECK(l.sum_lam_a2 == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(l.sum_b == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(l.sum_b2 == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(l.c1_hat == doctest::Approx(0.625).epsilon(1e-15));
        CHECK(l.c3_hat == doctest::Approx(0.25 / std::pow(2.0, 0.5)).epsilon(1e-15));
    }
    CHECK_THROWS_AS(lemma_sums(0.0, 1.0, EigenSpectrum{VectorXd::Ones(3)}, 0.5, 1), DomainError);
}

TEST_CASE("spectral sums scale with n on a regular grid") {
    std::vector<double> c1;
    std::vector<Index> ns{400, 800, 1600};
    for (Index n : ns) {
        const auto l = lemma_sums(0.2, 1.0, grid_spectrum(n, 1.0, 0.5), 0.5, 1);
        CHECK(l.sum_a2 > 0.0);
        CHECK(l.sum_lam_a2 > 0.0);
        CHECK(l.sum_b > 0.0);
        CHECK(l.c1_hat > 0.0);
        CHECK(l.c2_hat > 0.0);
        CHECK(l.c3_hat > 0.0);
        c1.push_back(l.c1_hat);
    }
    CHECK(rel(c1[1], c1[2]) < 0.05);
    for (double c : c1) {
        CHECK(c >= 0.5 * c1.back());
        CHECK(c <= 2.0 * c1.back());
    }
}

TEST_CASE("predicted CLT standard deviations") {
    LemmaSums l;
    l.c1_hat = 20.0;
    l.c2_hat = 500.0;
    l.c3_hat = 3.0;
    const auto a = clt_predicted_sd(l, 0.2, 7.489, 0.5, 1, 1000);
    const auto b = clt_predicted_sd(l, 0.2, 7.489, 0.5, 1, 2000);
    CHECK(rel(b.sd_tau2 / a.sd_tau2, std::pow(2.0, -0.5)) < 1e-14);
    CHECK(rel(a.sd_tau2, 0.2 * std::sqrt(1000.0) / (20.0 * std::sqrt(1000.0))) < 1e-14);
    // One-dimensional exponential: fourth-root rate.
    CHECK(rel(b.sd_kappa / a.sd_kappa, std::pow(2.0, -0.25)) < 1e-14);
    CHECK(rel(a.sd_kappa, 7.489 * std::sqrt(2.0 / 3.0) * std::pow(1000.0, -0.25)) < 1e-14);
    // Two dimensions: cube-root rate.
    const auto c = clt_predicted_sd(l, 0.2, 7.489, 0.5, 2, 1000);
    const auto e = clt_predicted_sd(l, 0.2, 7.489, 0.5, 2, 8000);
    CHECK(rel(e.sd_kappa / c.sd_kappa, 0.5) < 1e-14);
    l.c3_hat = 0.0;
    CHECK_THROWS_AS(clt_predicted_sd(l, 0.2, 7.489, 0.5, 1, 1000), NumericError);
}

TEST_CASE("score residuals") {
    const Index n = 400;
    const auto locs = make_design(DesignSpec{DesignKind::perturbed_grid_2d, 2, n, 3});
    const NoisyModelParams truth{{1.0, 7.489, 0.5}, 0.2};
    const VectorXd y = sample_gp(truth, locs, 3);
    const auto eig = eigen_sym_full(correlation_matrix(7.489, 0.5, distance_matrix(locs)));
    const VectorXd z = eig.rotate(y);

    SUBCASE("residuals are the negated partials of the spectral likelihood") {
        for (double t : {0.05, 0.2, 0.9}) {
            const auto r = score_residuals(t, 1.3, eig.spectrum, z);
            const auto g = neg_loglik_eigenpath_grad(t, 1.3, eig.spectrum, z);
            CHECK(std::abs(r.resid_tau2 + g.grad_tau2) <= 1e-10 * std::max(1.0, std::abs(g.grad_tau2)));
            CHECK(std::abs(r.resid_sigma2 + g.grad_sigma2) <= 1e-10 * std::max(1.0, std::abs(g.grad_sigma2)));
        }
    }
    SUBCASE("fit is stationary and beats a grid oracle") {
        const auto fit = fit_fixed_phi(7.489, 0.5, default_box(y), eig, y);
        REQUIRE(fit.converged);
        REQUIRE_FALSE(fit.hit_boundary);
        const auto r = score_residuals(fit, eig.spectrum, z);
        CHECK(std::abs(r.resid_tau2) <= 1e-6 * n);
        CHECK(std::abs(r.resid_sigma2) <= 1e-6 * n);

        double grid_best = INFINITY;
        for (int i = 0; i <= 200; ++i)
            for (int j = 0; j <= 200; ++j) {
                const double t = 0.02 + 0.5 * i / 200.0;
                const double s = 0.3 + 2.7 * j / 200.0;
                grid_best = std::min(grid_best, neg_loglik_eigenpath({{s, 7.489, 0.5}, t}, eig.spectrum, z));
            }
        CHECK(fit.neg_loglik <= grid_best + 1e-9);

        const auto moved = score_residuals(fit.tau2_hat + 0.01, fit.sigma2_hat, eig.spectrum, z);
        CHECK(std::abs(moved.resid_tau2) > std::abs(r.resid_tau2));
    }
    CHECK_THROWS_AS(score_residuals(0.2, 1.0, eig.spectrum, VectorXd::Ones(3)), DomainError);
}
