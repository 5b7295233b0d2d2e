#include <cmath>
#include <random>

#include "doctest.h"
#include "matern/estimation.hpp"
#include "matern/optimize.hpp"
#include "matern/simstudy.hpp"

using namespace matern;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

LocationSet grid_design(Index n, std::uint64_t seed) {
    return make_design(DesignSpec{DesignKind::perturbed_grid_2d, 2, n, seed});
}

}  // namespace

TEST_CASE("box minimizer on a quadratic with an active bound") {
    const Objective f = [](const VectorXd& x, VectorXd* g) {
        if (g) *g = Eigen::Vector2d(2 * (x(0) - 3), 4 * (x(1) + 1));
        return (x(0) - 3) * (x(0) - 3) + 2 * (x(1) + 1) * (x(1) + 1);
    };
    const auto r = minimize_box(f, Eigen::Vector2d(-5, 0), Eigen::Vector2d(5, 5), Eigen::Vector2d(0, 2));
    CHECK(r.converged);
    CHECK(r.at_bound);
    CHECK(r.x(0) == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(r.x(1) == 0.0);
}

TEST_CASE("box minimizer on Rosenbrock") {
    const Objective f = [](const VectorXd& x, VectorXd* g) {
        const double a = 1 - x(0), b = x(1) - x(0) * x(0);
        if (g) *g = Eigen::Vector2d(-2 * a - 400 * x(0) * b, 200 * b);
        return a * a + 100 * b * b;
    };
    const auto r = minimize_box(f, Eigen::Vector2d(-5, -5), Eigen::Vector2d(5, 5), Eigen::Vector2d(-1.2, 1));
    CHECK(r.converged);
    CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.x(1) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("fit mode names round-trip") {
    for (auto m : {FitMode::profile, FitMode::fixed_phi, FitMode::no_nugget})
        CHECK(parse_fit_mode(fit_mode_name(m)) == m);
    CHECK_THROWS_AS(parse_fit_mode("reml"), ConfigError);
}

TEST_CASE("fixed-decay fit lands in the simulated nugget band") {
    const auto locs = grid_design(400, 1);
    const NoisyModelParams truth{{1.0, 7.489, 0.5}, 0.2};
    const VectorXd y = sample_gp(truth, locs, 1);
    const auto fit = fit_fixed_phi(7.489, 0.5, default_box(y), locs, y);
    CHECK(fit.converged);
    CHECK(fit.tau2_hat >= 0.11);
    CHECK(fit.tau2_hat <= 0.28);
    CHECK(fit.kappa_hat == fit.sigma2_hat * std::pow(fit.phi_hat, 1.0));

    SUBCASE("stationary under the Cholesky-path gradient") {
        const auto g = neg_loglik(NoisyModelParams{{fit.sigma2_hat, 7.489, 0.5}, fit.tau2_hat}, locs, y);
        CHECK(std::hypot(fit.tau2_hat * g.grad_tau2, fit.sigma2_hat * g.grad_sigma2) <= 1.1e-6);
    }
}

TEST_CASE("fixed-decay fit on zero data sits on the lower corner") {
    const auto locs = grid_design(50, 2);
    const Box2 box{1e-3, 2.0, 1e-3, 2.0};
    const auto fit = fit_fixed_phi(7.489, 0.5, box, locs, VectorXd::Zero(50));
    CHECK(fit.hit_boundary);
    CHECK(fit.sigma2_hat == doctest::Approx(box.sigma2_lo).epsilon(1e-12));
    CHECK(fit.tau2_hat == doctest::Approx(box.tau2_lo).epsilon(1e-12));
}

TEST_CASE("fixed-decay fit agrees with a log-grid search") {
    const auto locs = grid_design(30, 3);
    const NoisyModelParams truth{{1.0, 7.489, 0.5}, 0.3};
    const VectorXd y = sample_gp(truth, locs, 3);
    const Box2 box{1e-3, 5.0, 1e-3, 5.0};
    const auto fit = fit_fixed_phi(7.489, 0.5, box, locs, y);
    const GaussianData data(locs, y);
    const int m = 200;
    const double step_t = std::log(box.tau2_hi / box.tau2_lo) / (m - 1);
    const double step_s = std::log(box.sigma2_hi / box.sigma2_lo) / (m - 1);
    double best = INFINITY, bt = 0, bs = 0;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const double t = box.tau2_lo * std::exp(step_t * i);
            const double s = box.sigma2_lo * std::exp(step_s * j);
            const double v = neg_loglik(NoisyModelParams{{s, 7.489, 0.5}, t}, data, false).value;
            if (v < best) {
                best = v;
                bt = t;
                bs = s;
            }
        }
    }
    CHECK(fit.neg_loglik <= best + 1e-8);
    CHECK(std::abs(std::log(fit.tau2_hat / bt)) <= step_t);
    CHECK(std::abs(std::log(fit.sigma2_hat / bs)) <= step_s);
}

TEST_CASE("fixed-phi fits trade sigma2 against phi") {
    const auto locs = grid_design(400, 4);
    const NoisyModelParams truth{{1.0, 7.489, 0.5}, 0.2};
    const VectorXd y = sample_gp(truth, locs, 4);
    const Box2 box = default_box(y);
    const auto a = fit_fixed_phi(5.0, 0.5, box, locs, y);
    const auto b = fit_fixed_phi(10.0, 0.5, box, locs, y);
    CHECK(a.converged);
    CHECK(b.converged);
    // phi doubles; kappa moves far less than a factor 2, sigma2 absorbs the rest.
    CHECK(a.sigma2_hat / b.sigma2_hat > 1.3);
    const double kr = b.kappa_hat / a.kappa_hat;
    CHECK(kr > 1.0 / 1.5);
    CHECK(kr < 1.5);
}

TEST_CASE("profile fit") {
    const auto locs = grid_design(200, 5);
    const NoisyModelParams truth{{1.0, 7.489, 0.5}, 0.2};
    const VectorXd y = sample_gp(truth, locs, 5);
    const GaussianData data(locs, y);
    const auto fit = fit_profile(0.5, data);
    CHECK(fit.converged);
    CHECK(fit.tau2_hat == doctest::Approx(fit.eta_hat * fit.sigma2_hat));
    CHECK(fit.kappa_hat == fit.sigma2_hat * fit.phi_hat);

    SUBCASE("full refinement reaches the same optimum") {
        FitOptions all;
        all.refine_top = 5;
        const auto full = fit_profile(0.5, data, all);
        CHECK(full.neg_loglik <= fit.neg_loglik + 1e-9);
        CHECK(full.neg_loglik == doctest::Approx(fit.neg_loglik).epsilon(1e-10));
    }
    SUBCASE("profile optimum is stationary for the full likelihood") {
        const NoisyModelParams p{{fit.sigma2_hat, fit.phi_hat, 0.5}, fit.tau2_hat};
        const auto g = neg_loglik(p, data, true);
        CHECK(g.value == doctest::Approx(fit.neg_loglik).epsilon(1e-12));
        CHECK(std::abs(fit.sigma2_hat * g.grad_sigma2) <= 1e-8);
        CHECK(std::abs(fit.phi_hat * g.grad_phi) <= 1.1e-6);
        CHECK(std::abs(fit.tau2_hat * g.grad_tau2) <= 1.1e-6);
    }
}

TEST_CASE("profile fit on constant data drives eta to its lower bound") {
    const auto locs = grid_design(60, 6);
    const auto fit = fit_profile(0.5, locs, VectorXd::Constant(60, 1.5));
    CHECK(fit.hit_boundary);
    CHECK(fit.eta_hat == 0.0);
    CHECK(fit.tau2_hat == 0.0);
}

TEST_CASE("no-nugget fit") {
    const auto locs = grid_design(20, 7);
    const NoisyModelParams truth{{1.0, 2.996, 0.5}, 0.0};
    const VectorXd y = sample_gp(truth, locs, 7);
    const GaussianData data(locs, y);
    const auto fit = fit_no_nugget(0.5, data);
    CHECK(fit.converged);
    CHECK(fit.tau2_hat == 0.0);
    CHECK(fit.eta_hat == 0.0);
    CHECK(fit.neg_loglik == doctest::Approx(profile_neg_loglik(fit.phi_hat, 0.0, 0.5, data).value));

    // 2-d grid over (phi, sigma2) of l(0, sigma2, phi).
    const double lphi_lo = std::log(0.5), lphi_hi = std::log(60.0);
    const double ls_lo = std::log(0.05), ls_hi = std::log(20.0);
    const int m = 200;
    double best = INFINITY, bp = 0, bs = 0;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const double phi = std::exp(lphi_lo + (lphi_hi - lphi_lo) * i / (m - 1));
            const double s = std::exp(ls_lo + (ls_hi - ls_lo) * j / (m - 1));
            const double v = neg_loglik(NoisyModelParams{{s, phi, 0.5}, 0.0}, data, false).value;
            if (v < best) {
                best = v;
                bp = phi;
                bs = s;
            }
        }
    }
    CHECK(fit.neg_loglik <= best + 1e-8);
    CHECK(std::abs(std::log(fit.phi_hat / bp)) <= (lphi_hi - lphi_lo) / (m - 1));
    CHECK(std::abs(std::log(fit.sigma2_hat / bs)) <= (ls_hi - ls_lo) / (m - 1));
}

TEST_CASE("estimation argument errors") {
    const auto locs = grid_design(10, 8);
    CHECK_THROWS_AS(fit_fixed_phi(7.0, 0.5, Box2{1.0, 0.5, 1e-3, 1.0}, locs, VectorXd::Ones(10)), DomainError);
    CHECK_THROWS_AS(fit_profile(0.5, locs.prefix(2), VectorXd::Ones(2)), DomainError);
    CHECK_THROWS_AS(fit_profile(-1.0, locs, VectorXd::Ones(10)), DomainError);
}
