#pragma once

// Independent reference computations used only by the test suites. None of
// these call into the library's numerical paths.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace oracle {

// K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt by the trapezoid rule with
// successive step halving. The integrand is analytic and decays doubly
// exponentially, so the rule converges geometrically in 1/h.
inline double bessel_k_quadrature(double nu, double x, double tol = 1e-15) {
    auto f = [nu, x](double t) {
        const double c = x * std::cosh(t);
        return 0.5 * (std::exp(-c + nu * t) + std::exp(-c - nu * t));
    };
    // Truncate where the log-integrand is below -745 relative to its peak.
    double t_max = 1.0;
    const double log_peak = -x;  // integrand at t = 0 is exp(-x)
    while (-x * std::cosh(t_max) + nu * t_max - log_peak > -60.0) t_max *= 1.25;

    double h = 0.25;
    auto trapezoid = [&](double step) {
        double s = 0.5 * f(0.0);
        for (int k = 1; k * step <= t_max; ++k) s += f(k * step);
        return s * step;
    };
    double prev = trapezoid(h);
    for (int it = 0; it < 20; ++it) {
        h *= 0.5;
        const double cur = trapezoid(h);
        if (std::abs(cur - prev) <= tol * std::abs(cur)) return cur;
        prev = cur;
    }
    return prev;
}

// Closed forms for half-integer orders.
inline double bessel_k_half_integer(double nu, double x) {
    const double base = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x);
    if (nu == 0.5) return base;
    if (nu == 1.5) return base * (1.0 + 1.0 / x);
    if (nu == 2.5) return base * (1.0 + 3.0 / x + 3.0 / (x * x));
    return std::numeric_limits<double>::quiet_NaN();
}

// Eigenvalues of a small symmetric matrix as roots of the characteristic
// polynomial det(K - lambda I): sign changes on a fine grid over the
// Gershgorin interval, refined by bisection. Determinants via full-pivot LU.
inline std::vector<double> charpoly_eigenvalues(const Eigen::MatrixXd& k) {
    const int n = static_cast<int>(k.rows());
    auto det_shift = [&](double lambda) {
        Eigen::MatrixXd m = k - lambda * Eigen::MatrixXd::Identity(n, n);
        return m.fullPivLu().determinant();
    };
    // Bracket sign changes of det on a fine grid over the Gershgorin interval.
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int i = 0; i < n; ++i) {
        double r = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j != i) r += std::abs(k(i, j));
        }
        lo = std::min(lo, k(i, i) - r);
        hi = std::max(hi, k(i, i) + r);
    }
    lo = std::max(lo, -1.0) - 1e-9;
    hi += 1e-9;
    const int grid = 200000;
    std::vector<double> roots;
    double prev_x = lo;
    double prev_v = det_shift(lo);
    for (int g = 1; g <= grid; ++g) {
        const double x = lo + (hi - lo) * g / grid;
        const double v = det_shift(x);
        if ((prev_v < 0.0) != (v < 0.0)) {
            double a = prev_x;
            double b = x;
            double fa = prev_v;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = det_shift(mid);
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_x = x;
        prev_v = v;
    }
    std::sort(roots.begin(), roots.end(), std::greater<>());
    return roots;
}

}  // namespace oracle
