#include "matern/specialfn.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "matern/error.hpp"

namespace matern {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxIter = 10000;

// Taylor coefficients of 1/Gamma(z) about 0: 1/Gamma(z) = sum_{k>=1} c[k] z^k.
constexpr std::array<double, 27> kRecipGamma = {
    0.0,
    1.0,
    0.57721566490153286061,
    -0.65587807152025388108,
    -0.042002635034095235529,
    0.1665386113822914895,
    -0.042197734555544336748,
    -0.0096219715278769735621,
    0.0072189432466630995424,
    -0.0011651675918590651121,
    -0.00021524167411495097282,
    0.00012805028238811618615,
    -0.000020134854780788238656,
    -1.2504934821426706573e-6,
    1.1330272319816958824e-6,
    -2.0563384169776071035e-7,
    6.1160951044814158179e-9,
    5.0020076444692229301e-9,
    -1.1812745704870201446e-9,
    1.0434267116911005105e-10,
    7.782263439905071254e-12,
    -3.6968056186422057082e-12,
    5.100370287454475979e-13,
    -2.0583260535665067832e-14,
    -5.3481225394230179824e-15,
    1.2267786282382607902e-15,
    -1.1812593016974587695e-16,
};

// Temme's auxiliary functions for |mu| <= 1/2:
//   g1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu),
//   g2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2,
// evaluated from the even/odd parts of the 1/Gamma series (no cancellation at mu -> 0).
struct TemmeGammas {
    double g1, g2, recip_gamma_plus, recip_gamma_minus;
};

TemmeGammas temme_gammas(double mu) {
    const double mu2 = mu * mu;
    double odd = 0.0;
    double even = 0.0;
    // Horner from the top: odd k contribute c_k mu^{k-1}, even k contribute c_k mu^{k-2}.
    for (int k = static_cast<int>(kRecipGamma.size()) - 1; k >= 1; --k) {
        if (k % 2 == 1) {
            odd = odd * mu2 + kRecipGamma[k];
        } else {
            even = even * mu2 + kRecipGamma[k];
        }
    }
    const double g1 = -even;
    const double g2 = odd;
    return {g1, g2, g2 - mu * g1, g2 + mu * g1};
}

// Value carried as mantissa * exp(log_scale) so that neither large x nor
// small x with high order leaves the double range.
struct Scaled {
    double mant;
    double log_scale;
};

// K_mu and K_{mu+1} for |mu| <= 1/2, x <= 2 (Temme series).
void temme_small_x(double mu, double x, Scaled& k_mu, Scaled& k_mu1) {
    const double half_x = 0.5 * x;
    const double pimu = std::numbers::pi * mu;
    const double fact = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
    const double d = -std::log(half_x);
    const double e = mu * d;
    const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
    const TemmeGammas g = temme_gammas(mu);

    double ff = fact * (g.g1 * std::cosh(e) + g.g2 * fact2 * d);
    double sum = ff;
    const double exp_e = std::exp(e);
    double p = 0.5 * exp_e / g.recip_gamma_plus;   // (x/2)^{-mu} Gamma(1+mu) / 2
    double q = 0.5 / (exp_e * g.recip_gamma_minus);  // (x/2)^{mu} Gamma(1-mu) / 2
    double c = 1.0;
    const double dd = half_x * half_x;
    double sum1 = p;
    int i = 1;
    for (; i <= kMaxIter; ++i) {
        const double fi = static_cast<double>(i);
        ff = (fi * ff + p + q) / (fi * fi - mu * mu);
        c *= dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        const double del = c * ff;
        sum += del;
        const double del1 = c * (p - fi * ff);
        sum1 += del1;
        if (std::abs(del) < std::abs(sum) * kEps * 0.5) break;
    }
    if (i > kMaxIter) throw NumericError("bessel_k: Temme series did not converge");
    k_mu = {sum, 0.0};
    k_mu1 = {sum1 * 2.0 / x, 0.0};
}

// K_mu and K_{mu+1} for |mu| <= 1/2, x > 2 (Steed's continued fraction);
// the exp(-x) factor is kept in log_scale.
void steed_large_x(double mu, double x, Scaled& k_mu, Scaled& k_mu1) {
    const double a1 = 0.25 - mu * mu;
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double delh = d;
    double h = d;
    double q1 = 0.0;
    double q2 = 1.0;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    int i = 1;
    for (; i <= kMaxIter; ++i) {
        const double fi = static_cast<double>(i);
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < kEps * 0.5) break;
    }
    if (i > kMaxIter) throw NumericError("bessel_k: continued fraction did not converge");
    const double log_k = 0.5 * std::log(std::numbers::pi / (2.0 * x)) - x - std::log(s);
    k_mu = {1.0, log_k};
    k_mu1 = {(mu + x + 0.5 - a1 * h) / x, log_k};
}

void check_args(double nu, double x, bool allow_zero_order) {
    if (!std::isfinite(nu) || !std::isfinite(x)) {
        throw DomainError("bessel_k: non-finite argument");
    }
    if (x <= 0.0) throw DomainError("bessel_k: x must be positive, got " + std::to_string(x));
    if (nu < 0.0 || (!allow_zero_order && nu == 0.0)) {
        throw DomainError("bessel_k: order must be positive, got " + std::to_string(nu));
    }
}

BesselEval evaluate(double nu, double x) {
    const double n_shift = std::floor(nu + 0.5);
    const double mu = nu - n_shift;
    Scaled k_lo{};
    Scaled k_hi{};
    if (x <= 2.0) {
        temme_small_x(mu, x, k_lo, k_hi);
    } else {
        steed_large_x(mu, x, k_lo, k_hi);
    }
    // Upward recurrence K_{m+1} = K_{m-1} + (2m/x) K_m, both terms sharing one scale.
    double lo = k_lo.mant;
    double hi = k_hi.mant;
    double log_scale = k_lo.log_scale;
    const int steps = static_cast<int>(n_shift);
    for (int k = 1; k <= steps; ++k) {
        const double m = mu + static_cast<double>(k);
        const double next = lo + (2.0 * m / x) * hi;
        lo = hi;
        hi = next;
        if (std::abs(hi) > 1e250) {
            log_scale += std::log(std::abs(hi));
            const double inv = 1.0 / std::abs(hi);
            lo *= inv;
            hi *= inv;
        }
    }
    BesselEval out;
    out.nu = nu;
    out.x = x;
    out.log_value = std::log(lo) + log_scale;
    out.value = lo * std::exp(log_scale);
    if (!std::isfinite(out.log_value)) throw NumericError("bessel_k: non-finite result");
    return out;
}

}  // namespace

double gamma_fn(double z) {
    if (!std::isfinite(z) || z <= 0.0) {
        throw DomainError("gamma_fn: argument must be positive and finite");
    }
    const double g = std::tgamma(z);
    if (!std::isfinite(g)) {
        throw OverflowError("gamma_fn: Gamma(" + std::to_string(z) + ") overflows double");
    }
    return g;
}

double log_gamma_fn(double z) {
    if (!std::isfinite(z) || z <= 0.0) {
        throw DomainError("log_gamma_fn: argument must be positive and finite");
    }
    return std::lgamma(z);
}

BesselEval bessel_k(double nu, double x) {
    check_args(nu, x, false);
    return evaluate(nu, x);
}

BesselEval bessel_k_nonneg(double nu, double x) {
    check_args(nu, x, true);
    return evaluate(nu, x);
}

}  // namespace matern
