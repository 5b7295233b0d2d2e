#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "matern/error.hpp"
#include "matern/specialfn.hpp"
#include "oracles.hpp"

using namespace matern;

namespace {
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
}  // namespace

TEST_CASE("gamma_fn at integer and half-integer points") {
    CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rel(gamma_fn(0.5), std::sqrt(std::numbers::pi)) < 1e-15);
    CHECK(rel(gamma_fn(5.0), 24.0) < 1e-15);
    CHECK(rel(gamma_fn(170.0), std::exp(std::lgamma(170.0))) < 1e-12);
}

TEST_CASE("gamma_fn errors") {
    CHECK_THROWS_AS(gamma_fn(0.0), DomainError);
    CHECK_THROWS_AS(gamma_fn(-1.5), DomainError);
    CHECK_THROWS_AS(gamma_fn(NAN), DomainError);
    CHECK_THROWS_AS(gamma_fn(180.0), OverflowError);
}

TEST_CASE("bessel_k closed forms") {
    CHECK(rel(bessel_k(0.5, 1.0).value, 0.46106850444789450) < 1e-14);
    // sqrt(pi/4) e^{-2} (1 + 1/2)
    CHECK(rel(bessel_k(1.5, 2.0).value, 0.17990665795209217) < 1e-13);
}

TEST_CASE("bessel_k against frozen high-precision values") {
    struct Case {
        double nu, x, value;
    };
    // Reference values computed offline to 20 digits.
    const Case cases[] = {
        {0.9, 1.0, 0.56306118324615827941},      {1.0, 1.0, 0.60190723019723457474},
        {1.5, 1.0, 0.92213700889578911688},      {0.3, 0.01, 6.8901026382927695432},
        {2.7, 5.0, 0.0071262487556333315595},    {4.9, 0.5, 9065.8532419485638496},
        {0.1, 30.0, 2.1328272173424445037e-14},  {3.3, 50.0, 3.7983171184797157528e-23},
        {0.75, 1e-06, 32585.643058426381567},    {5.0, 1e-06, 3.8399999999997608688e+32},
        {1.9, 2.0, 0.2352256194859619964},       {0.5000001, 2.5, 0.065065944262878071377},
        {2.5, 0.1, 1187.0212236418929429},
    };
    for (const auto& c : cases) {
        INFO("nu=" << c.nu << " x=" << c.x);
        CHECK(rel(bessel_k(c.nu, c.x).value, c.value) < 1e-12);
    }
}

TEST_CASE("bessel_k log_value past underflow") {
    CHECK(bessel_k(0.5, 700.0).log_value == doctest::Approx(-703.0497488148769749).epsilon(1e-14));
    CHECK(bessel_k(2.3, 700.0).log_value == doctest::Approx(-703.04615138571245929).epsilon(1e-14));
    CHECK(bessel_k(0.9, 300.0).log_value == doctest::Approx(-302.62516810222531959).epsilon(1e-14));
    const auto far = bessel_k(1.2, 800.0);
    CHECK(far.value == 0.0);
    CHECK(std::isfinite(far.log_value));
}

TEST_CASE("bessel_k matches the quadrature oracle") {
    for (double nu : {0.9, 1.0, 1.5, 0.2, 3.7}) {
        for (double x : {0.05, 0.7, 1.0, 1.99, 2.01, 6.0, 25.0}) {
            INFO("nu=" << nu << " x=" << x);
            CHECK(rel(bessel_k(nu, x).value, oracle::bessel_k_quadrature(nu, x)) < 1e-12);
        }
    }
}

TEST_CASE("bessel_k properties") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unu(0.05, 4.0);
    std::uniform_real_distribution<double> ulogx(std::log(1e-3), std::log(50.0));

    SUBCASE("exp(log_value) agrees with value") {
        for (int i = 0; i < 500; ++i) {
            const double nu = unu(rng);
            const double x = std::exp(ulogx(rng));
            const auto k = bessel_k(nu, x);
            CHECK(rel(std::exp(k.log_value), k.value) < 1e-12);
        }
    }
    SUBCASE("recurrence K_{nu+1} = K_{nu-1} + (2 nu / x) K_nu") {
        std::uniform_real_distribution<double> unu2(1.05, 4.0);
        for (int i = 0; i < 500; ++i) {
            const double nu = unu2(rng);
            const double x = std::exp(ulogx(rng));
            const double lhs = bessel_k(nu + 1.0, x).value;
            const double rhs = bessel_k(nu - 1.0, x).value + 2.0 * nu / x * bessel_k(nu, x).value;
            CHECK(rel(lhs, rhs) < 1e-10);
        }
    }
    SUBCASE("strictly decreasing in x") {
        for (double nu : {0.3, 0.5, 1.0, 2.2}) {
            double prev = bessel_k(nu, 1e-4).value;
            for (double x = 2e-4; x < 60.0; x *= 1.07) {
                const double cur = bessel_k(nu, x).value;
                CHECK(cur > 0.0);
                CHECK(cur < prev);
                prev = cur;
            }
        }
    }
    SUBCASE("small-argument law x^nu K_nu(x) -> Gamma(nu) 2^(nu-1)") {
        for (double nu : {0.4, 0.9, 1.5, 2.5}) {
            const double x = 1e-8;
            const double lhs = std::pow(x, nu) * bessel_k(nu, x).value;
            const double lim = std::tgamma(nu) * std::pow(2.0, nu - 1.0);
            CHECK(rel(lhs, lim) < 1e-6);
        }
    }
}

TEST_CASE("bessel_k order zero only through the non-negative entry point") {
    CHECK_THROWS_AS(bessel_k(0.0, 1.0), DomainError);
    // K_0(1) = 0.42102443824070833334
    CHECK(rel(bessel_k_nonneg(0.0, 1.0).value, 0.42102443824070833334) < 1e-13);
}

TEST_CASE("bessel_k domain errors") {
    CHECK_THROWS_AS(bessel_k(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(bessel_k(1.0, -2.0), DomainError);
    CHECK_THROWS_AS(bessel_k(-1.0, 2.0), DomainError);
    CHECK_THROWS_AS(bessel_k(NAN, 2.0), DomainError);
    CHECK_THROWS_AS(bessel_k(1.0, INFINITY), DomainError);
}
