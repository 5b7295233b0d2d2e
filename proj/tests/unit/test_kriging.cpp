#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "matern/error.hpp"
#include "matern/kriging.hpp"
#include "matern/simstudy.hpp"

using namespace matern;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

LocationSet random_design(Index n, std::uint64_t seed, int d = 2) {
    return make_design(DesignSpec{DesignKind::uniform_random, d, n, seed});
}

// Covariance built entry by entry from the closed exponential form.
MatrixXd exp_cov(const LocationSet& locs, double sigma2, double phi, double tau2) {
    const Index n = locs.size();
    MatrixXd v(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            const double h = (locs.coords().row(i) - locs.coords().row(j)).norm();
            v(i, j) = sigma2 * std::exp(-phi * h) + (i == j ? tau2 : 0.0);
        }
    return v;
}

VectorXd exp_cross(const LocationSet& locs, double sigma2, double phi, const std::array<double, 3>& s0) {
    VectorXd g(locs.size());
    for (Index i = 0; i < locs.size(); ++i) {
        double h2 = 0.0;
        for (int k = 0; k < locs.dim(); ++k) h2 += std::pow(locs.coords()(i, k) - s0[static_cast<std::size_t>(k)], 2);
        g(i) = sigma2 * std::exp(-phi * std::sqrt(h2));
    }
    return g;
}

const NoisyModelParams kTruth{{1.0, 7.489, 0.5}, 0.2};

}  // namespace

TEST_CASE("prediction without nugget interpolates the data") {
    const auto locs = random_design(30, 1);
    const NoisyModelParams p{{1.3, 4.0, 0.5}, 0.0};
    const VectorXd y = VectorXd::LinSpaced(30, -1.0, 2.0);
    for (Index i : {0, 7, 29}) {
        const auto s = locs.point(i);
        CHECK(krig_predict(p, locs, y, s) == doctest::Approx(y(i)).epsilon(1e-7));
    }
}

TEST_CASE("single observation is a scalar shrinkage") {
    MatrixXd c(1, 2);
    c << 0.2, 0.3;
    const LocationSet locs(2, c);
    const NoisyModelParams p{{2.0, 3.0, 0.5}, 0.5};
    const std::array<double, 3> s0{0.5, 0.7, 0.0};
    const double h = std::hypot(0.3, 0.4);
    const double expect = 2.0 * std::exp(-3.0 * h) / 2.5 * 1.7;
    CHECK(rel(krig_predict(p, locs, VectorXd::Constant(1, 1.7), s0), expect) < 1e-14);
}

TEST_CASE("three-site predictor matches an explicit LU solve") {
    MatrixXd c(3, 2);
    c << 0.1, 0.1, 0.4, 0.2, 0.3, 0.8;
    const LocationSet locs(2, c);
    const NoisyModelParams p{{1.5, 2.5, 0.5}, 0.3};
    const std::array<double, 3> s0{0.25, 0.45, 0.0};
    const VectorXd y = Eigen::Vector3d(0.4, -1.1, 0.9);
    const MatrixXd gam = exp_cov(locs, 1.5, 2.5, 0.3);
    const VectorXd g = exp_cross(locs, 1.5, 2.5, s0);
    const VectorXd w = gam.fullPivLu().solve(g);
    CHECK(rel(krig_predict(p, locs, y, s0), w.dot(y)) < 1e-13);
    CHECK(rel(KrigingPredictor(p, locs).asserted_mspe(s0), 1.5 - g.dot(w)) < 1e-13);
}

TEST_CASE("mspe at the truth reduces to the prior variance minus the explained part") {
    const auto locs = random_design(200, 2);
    const KrigingPredictor pred(kTruth, locs);
    for (const std::array<double, 3> s0 : {std::array<double, 3>{0.5, 0.5, 0.0}, {0.01, 0.93, 0.0}}) {
        const double realized = krig_mspe(kTruth, kTruth, locs, s0);
        const double asserted = pred.asserted_mspe(s0);
        CHECK(std::abs(realized - asserted) <= 1e-10);
        const auto b = mspe_batch(kTruth, kTruth, locs, {s0});
        CHECK(std::abs(b.realized(0) - asserted) <= 1e-10);
        CHECK(std::abs(b.at_truth(0) - asserted) <= 1e-10);
    }
}

TEST_CASE("no data leaves the prior variance") {
    const LocationSet empty(2, MatrixXd(0, 2));
    const std::array<double, 3> s0{0.3, 0.3, 0.0};
    CHECK(krig_mspe(kTruth, kTruth, empty, s0) == 1.0);
    CHECK(krig_mspe(kTruth, kTruth, empty, s0, PredictionTarget::observation) == doctest::Approx(1.2));
}

TEST_CASE("noise-free truth predicted at a site has zero error") {
    const auto locs = random_design(40, 3);
    const NoisyModelParams p{{1.0, 5.0, 0.5}, 0.0};
    CHECK(std::abs(krig_mspe(p, p, locs, locs.point(5))) <= 1e-8);
}

TEST_CASE("efficiency ratios") {
    const auto locs = random_design(150, 4);
    const std::array<double, 3> s0{0.47, 0.52, 0.0};
    SUBCASE("fit equal to truth gives one and one") {
        const auto r = efficiency_ratios(kTruth, kTruth, locs, s0);
        CHECK(r.ratio_i == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.ratio_ii == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("wrong nugget inflates the realized error") {
        const NoisyModelParams fit{{1.0, 7.489, 0.5}, 0.8};
        CHECK(efficiency_ratios(fit, kTruth, locs, s0).ratio_i > 1.02);
    }
    SUBCASE("degenerate truth is rejected") {
        const NoisyModelParams exact{{1.0, 5.0, 0.5}, 0.0};
        CHECK_THROWS_AS(efficiency_ratios(exact, exact, locs, locs.point(0)), DomainError);
    }
}

TEST_CASE("best linear predictor beats misspecified predictors") {
    const auto locs = random_design(120, 5);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> logu(std::log(0.2), std::log(5.0));
    std::uniform_real_distribution<double> pos(0.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        const NoisyModelParams fit{{std::exp(logu(rng)), 7.489 * std::exp(logu(rng)), 0.5},
                                   0.2 * std::exp(logu(rng))};
        const std::array<double, 3> s0{pos(rng), pos(rng), 0.0};
        const double best = krig_mspe(kTruth, kTruth, locs, s0);
        CHECK(krig_mspe(fit, kTruth, locs, s0) >= best - 1e-10);
    }
}

TEST_CASE("analytic mspe agrees with simulated squared errors") {
    // Sites plus the target point in one design, so w(s0) is drawn jointly.
    const Index n = 60;
    const auto all = random_design(n + 1, 6);
    std::vector<Index> rows(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
    const LocationSet locs = all.subset(rows);
    const auto s0 = all.point(n);
    const NoisyModelParams fit{{0.7, 12.0, 0.5}, 0.35};
    const KrigingPredictor pred(fit, locs);
    const VectorXd wts = pred.weights(s0);
    const GaussianSampler sampler(kTruth, all);

    const int reps = 4000;
    double sw = 0.0, sw2 = 0.0, sy = 0.0, sy2 = 0.0;
    VectorXd w, y;
    for (int r = 0; r < reps; ++r) {
        sampler.draw(derive_seed(11, {static_cast<std::uint64_t>(r)}), w, y);
        const double zhat = wts.dot(y.head(n));
        const double ew = (zhat - w(n)) * (zhat - w(n));
        const double ey = (zhat - y(n)) * (zhat - y(n));
        sw += ew;
        sw2 += ew * ew;
        sy += ey;
        sy2 += ey * ey;
    }
    const double mw = sw / reps, se_w = std::sqrt((sw2 / reps - mw * mw) / reps);
    const double my = sy / reps, se_y = std::sqrt((sy2 / reps - my * my) / reps);
    CHECK(std::abs(mw - krig_mspe(fit, kTruth, locs, s0)) <= 3.0 * se_w);
    CHECK(std::abs(my - krig_mspe(fit, kTruth, locs, s0, PredictionTarget::observation)) <= 3.0 * se_y);
    CHECK(my >= kTruth.tau2 - 2.0 * se_y);
}

TEST_CASE("observation target adds the nugget") {
    const auto locs = random_design(50, 7);
    const std::array<double, 3> s0{0.3, 0.6, 0.0};
    const NoisyModelParams fit{{1.2, 6.0, 0.5}, 0.1};
    const double lat = krig_mspe(fit, kTruth, locs, s0);
    const double obs = krig_mspe(fit, kTruth, locs, s0, PredictionTarget::observation);
    CHECK(obs - lat == doctest::Approx(kTruth.tau2).epsilon(1e-12));
    const KrigingPredictor p(fit, locs);
    CHECK(p.asserted_mspe(s0, PredictionTarget::observation) - p.asserted_mspe(s0) ==
          doctest::Approx(fit.tau2).epsilon(1e-12));
}

TEST_CASE("grid reference mse closed form") {
    CHECK(rel(stein_grid_mse(1.0, 2.0, 0.01, 0.2), std::sqrt(2.0 * std::numbers::pi * 0.01 * 0.2) / 2.0) < 1e-15);
    CHECK(stein_grid_mse(1.0, 2.0, 0.01, 0.2) == doctest::Approx(0.0560499).epsilon(1e-6));
    for (double alpha : {1.5, 2.0, 3.8}) {
        const double a = stein_grid_mse(0.7, alpha, 0.003, 0.4);
        const double b = stein_grid_mse(0.7, alpha, 0.006, 0.4);
        CHECK(rel(b / a, std::pow(2.0, 1.0 - 1.0 / alpha)) < 1e-13);
    }
    CHECK_THROWS_AS(stein_grid_mse(1.0, 1.0, 0.01, 0.2), DomainError);
    CHECK_THROWS_AS(stein_grid_mse(1.0, 0.5, 0.01, 0.2), DomainError);
    CHECK_THROWS_AS(stein_grid_mse(-1.0, 2.0, 0.01, 0.2), DomainError);
}

TEST_CASE("dense one-dimensional grid approaches the grid reference mse") {
    const Index n = 2000;
    const double delta = 1.0 / static_cast<double>(n);
    const auto locs = make_design(DesignSpec{DesignKind::regular_grid, 1, n, 0});
    const NoisyModelParams p{{1.0, 7.489, 0.5}, 0.2};
    // c = C sigma2 phi^{2 nu}, C = 1/pi for nu = 1/2 in one dimension.
    const double c = p.matern.sigma2 * p.matern.phi / std::numbers::pi;
    const double ref = stein_grid_mse(c, 2.0, delta, p.tau2);
    const KrigingPredictor pred(p, locs);
    for (double s : {0.5 + 0.5 * delta, 0.4, 0.6173}) {
        INFO("s0=" << s);
        CHECK(rel(pred.asserted_mspe({s, 0.0, 0.0}), ref) < 0.10);
    }
}
