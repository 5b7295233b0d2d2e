#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "matern/simd.hpp"

using namespace matern;

namespace {

std::vector<double> uniform(std::size_t n, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

bool have_avx2() { return simd::detected_isa() == simd::Isa::avx2; }

}  // namespace

TEST_CASE("isa override falls back when unsupported") {
    simd::ScopedIsa guard(simd::Isa::scalar);
    CHECK(simd::active_isa() == simd::Isa::scalar);
    const auto got = simd::set_active_isa(simd::Isa::avx2);
    CHECK(got == simd::detected_isa());
}

TEST_CASE("exp kernel: avx2 matches scalar within 2 ulp") {
    if (!have_avx2()) return;
    // Odd length exercises the padded tail.
    for (std::size_t n : {1u, 3u, 4u, 5u, 1001u}) {
        const auto x = uniform(n, 0.0, 60.0, 11 + n);
        std::vector<double> a(n), b(n);
        simd::table(simd::Isa::scalar).exp_neg_scaled(x.data(), 7.489, n, a.data());
        simd::table(simd::Isa::avx2).exp_neg_scaled(x.data(), 7.489, n, b.data());
        for (std::size_t i = 0; i < n; ++i) {
            if (a[i] == 0.0) {
                CHECK(b[i] == doctest::Approx(0.0));
                continue;
            }
            CHECK(std::abs(a[i] - b[i]) <= 4.5e-16 * std::abs(a[i]));
        }
    }
}

TEST_CASE("exp kernel: exact at zero and flushed deep in the tail") {
    for (auto isa : {simd::Isa::scalar, simd::Isa::avx2}) {
        if (isa == simd::Isa::avx2 && !have_avx2()) continue;
        const std::vector<double> x{0.0, 0.0, 0.0, 0.0, 1000.0};
        std::vector<double> out(x.size());
        simd::table(isa).exp_neg_scaled(x.data(), 1.0, x.size(), out.data());
        for (int i = 0; i < 4; ++i) CHECK(out[static_cast<std::size_t>(i)] == 1.0);
        CHECK(out[4] == 0.0);
    }
}

TEST_CASE("distance kernel: avx2 bitwise equal to scalar") {
    if (!have_avx2()) return;
    for (int d = 1; d <= 3; ++d) {
        const std::size_t n = 37;
        std::vector<std::vector<double>> cols;
        std::vector<const double*> axes;
        for (int k = 0; k < d; ++k) cols.push_back(uniform(n, 0.0, 1.0, 100 + static_cast<unsigned>(k)));
        for (auto& c : cols) axes.push_back(c.data());
        const double p[3] = {0.3, 0.7, 0.1};
        std::vector<double> a(n), b(n);
        simd::table(simd::Isa::scalar).distances(axes.data(), d, n, p, a.data());
        simd::table(simd::Isa::avx2).distances(axes.data(), d, n, p, b.data());
        CHECK(a == b);
    }
}

TEST_CASE("dot kernels agree across isa") {
    if (!have_avx2()) return;
    const std::size_t n = 4099;
    const auto a = uniform(n, -1.0, 1.0, 1);
    const auto b = uniform(n, -1.0, 1.0, 2);
    const auto c = uniform(n, 0.0, 2.0, 3);
    const double s = simd::table(simd::Isa::scalar).dot(a.data(), b.data(), n);
    const double v = simd::table(simd::Isa::avx2).dot(a.data(), b.data(), n);
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) abs_sum += std::abs(a[i] * b[i]);
    CHECK(std::abs(s - v) <= 1e-14 * abs_sum);
    const double s3 = simd::table(simd::Isa::scalar).dot3(a.data(), b.data(), c.data(), n);
    const double v3 = simd::table(simd::Isa::avx2).dot3(a.data(), b.data(), c.data(), n);
    CHECK(std::abs(s3 - v3) <= 1e-14 * 2.0 * abs_sum);
}

TEST_CASE("spectral sums agree across isa, including tails") {
    if (!have_avx2()) return;
    for (std::size_t n : {1u, 2u, 7u, 900u, 1601u}) {
        auto lambda = uniform(n, 0.0, 50.0, 5 + n);
        lambda[0] = 1e-12;
        const auto z = uniform(n, -3.0, 3.0, 9 + n);
        std::vector<double> z2(n);
        for (std::size_t i = 0; i < n; ++i) z2[i] = z[i] * z[i];
        for (double tau2 : {0.2, 1e-9, 3.0}) {
            const auto s = simd::table(simd::Isa::scalar).spectral_sums(lambda.data(), z2.data(), n, tau2, 1.3);
            const auto v = simd::table(simd::Isa::avx2).spectral_sums(lambda.data(), z2.data(), n, tau2, 1.3);
            CHECK(v.quad == doctest::Approx(s.quad).epsilon(1e-13));
            double abs_log = 0.0;
            for (std::size_t i = 0; i < n; ++i) abs_log += std::abs(std::log(tau2 + 1.3 * lambda[i]));
            CHECK(std::abs(v.logdet - s.logdet) <= 1e-14 * abs_log + 1e-15);
        }
    }
}

TEST_CASE("spectral sums flag non-positive denominators") {
    for (auto isa : {simd::Isa::scalar, simd::Isa::avx2}) {
        if (isa == simd::Isa::avx2 && !have_avx2()) continue;
        const std::vector<double> lambda{1.0, -2.0, 0.5, 0.1, 0.3};
        const std::vector<double> z2{1.0, 1.0, 1.0, 1.0, 1.0};
        const auto s = simd::table(isa).spectral_sums(lambda.data(), z2.data(), 5, 0.5, 1.0);
        CHECK_FALSE(std::isfinite(s.logdet));
    }
}

TEST_CASE("isa names parse") {
    CHECK(simd::parse_isa("scalar") == simd::Isa::scalar);
    CHECK(simd::parse_isa("avx2") == simd::Isa::avx2);
    CHECK(simd::parse_isa("auto") == simd::detected_isa());
    CHECK(simd::parse_isa(simd::isa_name(simd::Isa::scalar)) == simd::Isa::scalar);
    CHECK_THROWS_AS(simd::parse_isa("sse9"), std::invalid_argument);
}
