#include "matern/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "matern/error.hpp"

namespace matern {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Point {
    Eigen::VectorXd x;
    double f = kInf;
    Eigen::VectorXd g;
};

Eigen::VectorXd project(Eigen::VectorXd x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

bool at_lower(double x, double lo) { return x <= lo; }
bool at_upper(double x, double hi) { return x >= hi; }

}  // namespace

Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                   const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
    Eigen::VectorXd pg = g;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if ((at_lower(x(i), lower(i)) && g(i) > 0.0) || (at_upper(x(i), upper(i)) && g(i) < 0.0)) pg(i) = 0.0;
    }
    return pg;
}

OptimResult minimize_box(const Objective& f, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                         Eigen::VectorXd x0, const OptimOptions& options) {
    const Eigen::Index dim = x0.size();
    if (lower.size() != dim || upper.size() != dim || (lower.array() > upper.array()).any())
        throw DomainError("minimize_box: inconsistent bounds");

    OptimResult res;
    auto eval = [&](const Eigen::VectorXd& x, bool with_grad) {
        Point p;
        p.x = x;
        ++res.n_evals;
        try {
            Eigen::VectorXd g(dim);
            p.f = f(x, with_grad ? &g : nullptr);
            if (with_grad) p.g = g;
            if (!std::isfinite(p.f) || (with_grad && !p.g.allFinite())) p.f = kInf;
        } catch (const Error&) {
            p.f = kInf;
        }
        return p;
    };

    Point cur = eval(project(std::move(x0), lower, upper), true);
    if (!std::isfinite(cur.f)) {
        res.x = cur.x;
        res.value = kInf;
        res.message = "objective not finite at the start";
        return res;
    }

    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(dim, dim);
    bool first = true;
    Eigen::VectorXd pg = projected_gradient(cur.x, cur.g, lower, upper);
    for (res.iterations = 0; res.iterations < options.max_iter; ++res.iterations) {
        if (pg.norm() <= options.gtol) {
            res.converged = true;
            res.message = "projected gradient below tolerance";
            break;
        }
        // Free variables: not held at a bound by the gradient.
        Eigen::VectorXd mask = Eigen::VectorXd::Ones(dim);
        for (Eigen::Index i = 0; i < dim; ++i)
            if (pg(i) == 0.0 && cur.g(i) != 0.0) mask(i) = 0.0;
        Eigen::VectorXd dir = -(mask.asDiagonal() * h * mask.asDiagonal() * pg);
        if (!(dir.dot(pg) < 0.0)) {
            h.setIdentity();
            dir = -pg;
        }
        double t = 1.0;
        const double dmax = dir.cwiseAbs().maxCoeff();
        if (first || dmax * t > options.max_step) t = std::min(1.0, options.max_step / dmax);

        Point next;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            const Eigen::VectorXd xt = project(cur.x + t * dir, lower, upper);
            if ((xt - cur.x).cwiseAbs().maxCoeff() == 0.0) break;
            Point trial = eval(xt, false);
            if (std::isfinite(trial.f) && trial.f <= cur.f + 1e-4 * cur.g.dot(xt - cur.x)) {
                next = eval(xt, true);
                accepted = std::isfinite(next.f);
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // Near the optimum objective differences drown in rounding;
            // accept a short step if it shrinks the projected gradient.
            const Eigen::VectorXd xt = project(cur.x + std::min(1.0, 1.0 / std::max(dmax, 1e-300)) * dir, lower, upper);
            Point trial = eval(xt, true);
            if (std::isfinite(trial.f) &&
                projected_gradient(trial.x, trial.g, lower, upper).norm() < pg.norm() &&
                trial.f <= cur.f + 1e-12 * std::abs(cur.f)) {
                next = trial;
                accepted = true;
            }
        }
        if (!accepted) {
            res.message = "line search failed";
            break;
        }

        const Eigen::VectorXd s = next.x - cur.x;
        const Eigen::VectorXd yv = next.g - cur.g;
        const double sy = s.dot(yv);
        if (first && sy > 0.0) h *= sy / yv.squaredNorm();
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            const double r = 1.0 / sy;
            const Eigen::MatrixXd v = Eigen::MatrixXd::Identity(dim, dim) - r * s * yv.transpose();
            h = v * h * v.transpose() + r * s * s.transpose();
        }
        first = false;
        const double fprev = cur.f;
        cur = std::move(next);
        pg = projected_gradient(cur.x, cur.g, lower, upper);
        if (std::abs(fprev - cur.f) <= options.ftol * std::max(1.0, std::abs(cur.f)) &&
            pg.norm() <= options.gtol) {
            res.converged = true;
            res.message = "objective change and projected gradient below tolerance";
            ++res.iterations;
            break;
        }
    }
    if (res.iterations >= options.max_iter) res.message = "iteration limit";
    res.x = cur.x;
    res.value = cur.f;
    res.grad = cur.g;
    res.proj_grad_norm = pg.norm();
    for (Eigen::Index i = 0; i < dim; ++i)
        if (at_lower(cur.x(i), lower(i)) || at_upper(cur.x(i), upper(i))) res.at_bound = true;
    return res;
}

}  // namespace matern
