#include "matern/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "matern/optimize.hpp"

namespace matern {
namespace {

constexpr double kEtaZero = 1e-8;

double sample_variance(const Eigen::VectorXd& y) {
    if (y.size() < 2) return 0.0;
    const double mean = y.mean();
    return (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1);
}

OptimOptions optim_options(const FitOptions& o) {
    OptimOptions out;
    out.max_iter = o.max_iter;
    out.gtol = o.gtol;
    out.ftol = o.ftol;
    return out;
}

struct Candidate {
    OptimResult opt;
    int index = 0;
};

// Lowest objective, preferring converged runs; ties go to the earlier start.
const Candidate* pick_best(const std::vector<Candidate>& runs) {
    const Candidate* best = nullptr;
    for (const auto& c : runs) {
        if (!std::isfinite(c.opt.value)) continue;
        if (!best || (c.opt.converged && !best->opt.converged) ||
            (c.opt.converged == best->opt.converged && c.opt.value < best->opt.value))
            best = &c;
    }
    return best;
}

void finish(FitResult& r, const std::vector<Candidate>& runs, const Candidate& best, int evals_outside) {
    r.neg_loglik = best.opt.value;
    r.converged = best.opt.converged;
    r.hit_boundary = best.opt.at_bound;
    r.grad_norm = best.opt.proj_grad_norm;
    r.iterations = best.opt.iterations;
    r.message = best.opt.message;
    r.starts = static_cast<int>(runs.size());
    r.n_evals = evals_outside;
    for (const auto& c : runs) {
        r.n_evals += c.opt.n_evals;
        if (c.opt.converged) ++r.starts_converged;
    }
    r.kappa_hat = r.sigma2_hat * std::pow(r.phi_hat, 2.0 * r.nu);
}

[[noreturn]] void fail(const FitResult& best, const std::vector<Candidate>& runs, std::string_view what) {
    std::ostringstream os;
    os << what << ": no start converged";
    for (const auto& c : runs) os << "; start " << c.index << ": " << c.opt.message << " (f=" << c.opt.value << ")";
    throw FitFailure(best, os.str());
}

double phi_lower(double nu, const FitOptions& o) { return phi_from_effective_range(o.range_max, nu); }
double phi_upper(double nu, const FitOptions& o) { return phi_from_effective_range(o.range_min, nu); }

}  // namespace

std::string_view fit_mode_name(FitMode mode) {
    switch (mode) {
        case FitMode::profile: return "profile";
        case FitMode::fixed_phi: return "fixed-phi";
        case FitMode::no_nugget: return "no-nugget";
    }
    return "unknown";
}

FitMode parse_fit_mode(std::string_view name) {
    if (name == "profile") return FitMode::profile;
    if (name == "fixed-phi" || name == "fixed_phi") return FitMode::fixed_phi;
    if (name == "no-nugget" || name == "no_nugget") return FitMode::no_nugget;
    throw ConfigError("unknown fit mode '" + std::string(name) + "'");
}

void Box2::validate() const {
    if (!(tau2_lo > 0.0 && tau2_lo < tau2_hi && sigma2_lo > 0.0 && sigma2_lo < sigma2_hi) ||
        !std::isfinite(tau2_hi) || !std::isfinite(sigma2_hi))
        throw DomainError("Box2: need 0 < lo < hi < inf on both axes");
}

Box2 default_box(const Eigen::VectorXd& y) {
    const double hi = std::max(10.0 * sample_variance(y), 1e-3);
    return Box2{1e-4, hi, 1e-4, hi};
}

double nugget_fraction_guess(const GaussianData& data) {
    const Index n = data.size();
    const double var = sample_variance(data.y());
    if (n < 2 || !(var > 0.0)) return 0.5;
    const auto& d = data.distances();
    double acc = 0.0;
    for (Index j = 0; j < n; ++j) {
        Index best = j == 0 ? 1 : 0;
        for (Index i = 0; i < n; ++i)
            if (i != j && d(i, j) < d(best, j)) best = i;
        const double diff = data.y()(j) - data.y()(best);
        acc += 0.5 * diff * diff;
    }
    return std::clamp(acc / static_cast<double>(n) / var, 0.01, 0.99);
}

FitResult fit_fixed_phi(double phi1, double nu, const Box2& box, const EigenDecomposition& eig,
                        const Eigen::VectorXd& y, const FitOptions& options) {
    box.validate();
    if (!(phi1 > 0.0) || !(nu > 0.0)) throw DomainError("fit_fixed_phi: phi1 and nu must be positive");
    if (eig.vectors.rows() != y.size()) throw DomainError("fit_fixed_phi: decomposition and y sizes differ");
    const Eigen::VectorXd z = eig.rotate(y);
    const EigenSpectrum& spec = eig.spectrum;

    Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
        const double t2 = std::exp(x(0));
        const double s2 = std::exp(x(1));
        const auto e = neg_loglik_eigenpath_grad(t2, s2, spec, z);
        if (g) *g = Eigen::Vector2d(t2 * e.grad_tau2, s2 * e.grad_sigma2);
        return e.value;
    };
    const Eigen::Vector2d lo(std::log(box.tau2_lo), std::log(box.sigma2_lo));
    const Eigen::Vector2d hi(std::log(box.tau2_hi), std::log(box.sigma2_hi));
    const double total = std::clamp(sample_variance(y), box.tau2_lo + box.sigma2_lo, box.tau2_hi + box.sigma2_hi);

    std::vector<Candidate> runs;
    const double shares[] = {0.1, 0.3, 0.5, 0.7, 0.9};
    for (int k = 0; k < 5; ++k) {
        const Eigen::Vector2d x0(std::log(shares[k] * total), std::log((1.0 - shares[k]) * total));
        runs.push_back({minimize_box(f, lo, hi, x0, optim_options(options)), k});
    }
    const Candidate* best = pick_best(runs);
    FitResult r;
    r.mode = FitMode::fixed_phi;
    r.nu = nu;
    r.phi_hat = phi1;
    r.box = box;
    if (!best) {
        finish(r, runs, runs.front(), 0);
        fail(r, runs, "fit_fixed_phi");
    }
    r.tau2_hat = std::exp(best->opt.x(0));
    r.sigma2_hat = std::exp(best->opt.x(1));
    r.eta_hat = r.tau2_hat / r.sigma2_hat;
    finish(r, runs, *best, 0);
    if (!r.converged) fail(r, runs, "fit_fixed_phi");
    return r;
}

FitResult fit_fixed_phi(double phi1, double nu, const Box2& box, const LocationSet& locs,
                        const Eigen::VectorXd& y, const FitOptions& options) {
    if (y.size() != locs.size()) throw DomainError("fit_fixed_phi: y length differs from location count");
    box.validate();
    const auto eig = eigen_sym_full(correlation_matrix(phi1, nu, distance_matrix(locs)));
    return fit_fixed_phi(phi1, nu, box, eig, y, options);
}

FitResult fit_profile(double nu, const GaussianData& data, const FitOptions& options) {
    if (data.size() < 3) throw DomainError("fit_profile: need at least 3 observations");
    if (!(nu > 0.0)) throw DomainError("fit_profile: nu must be positive");
    const double lphi_lo = std::log(phi_lower(nu, options));
    const double lphi_hi = std::log(phi_upper(nu, options));
    const Eigen::Vector2d lo(lphi_lo, std::log(options.eta_min));
    const Eigen::Vector2d hi(lphi_hi, std::log(options.eta_max));

    Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
        const double phi = std::exp(x(0));
        const double eta = std::exp(x(1));
        const auto e = profile_neg_loglik(phi, eta, nu, data, g != nullptr);
        if (g) *g = Eigen::Vector2d(phi * e.grad_phi, eta * e.grad_eta);
        return e.value;
    };

    const double frac = nugget_fraction_guess(data);
    const double eta0 = frac / (1.0 - frac);
    struct Start {
        double eta, range;
    };
    const Start starts[] = {{eta0, 0.1}, {eta0, 0.3}, {eta0, 0.8}, {4.0 * eta0, 0.3}, {0.25 * eta0, 0.3}};
    std::vector<std::pair<double, int>> ranked;
    std::vector<Eigen::Vector2d> x0s;
    int evals = 0;
    for (int k = 0; k < 5; ++k) {
        const Eigen::Vector2d x0 =
            Eigen::Vector2d(std::log(phi_from_effective_range(starts[k].range, nu)), std::log(starts[k].eta))
                .cwiseMax(lo)
                .cwiseMin(hi);
        x0s.push_back(x0);
        double v = std::numeric_limits<double>::infinity();
        if (options.refine_top < 5) {
            ++evals;
            try {
                v = f(x0, nullptr);
            } catch (const Error&) {
            }
        }
        ranked.emplace_back(v, k);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Candidate> runs;
    const int top = std::clamp(options.refine_top, 1, 5);
    for (int r = 0; r < top; ++r) {
        const int k = ranked[static_cast<std::size_t>(r)].second;
        runs.push_back({minimize_box(f, lo, hi, x0s[static_cast<std::size_t>(k)], optim_options(options)), k});
    }

    FitResult r;
    r.mode = FitMode::profile;
    r.nu = nu;
    const Candidate* best = pick_best(runs);
    if (!best) {
        finish(r, runs, runs.front(), evals);
        fail(r, runs, "fit_profile");
    }
    r.phi_hat = std::exp(best->opt.x(0));
    const double eta = std::exp(best->opt.x(1));
    r.sigma2_hat = profile_neg_loglik(r.phi_hat, eta, nu, data).sigma2_hat;
    ++evals;
    r.eta_hat = eta < kEtaZero ? 0.0 : eta;
    r.tau2_hat = r.eta_hat * r.sigma2_hat;
    finish(r, runs, *best, evals);
    if (!r.converged) fail(r, runs, "fit_profile");
    return r;
}

FitResult fit_profile(double nu, const LocationSet& locs, const Eigen::VectorXd& y, const FitOptions& options) {
    return fit_profile(nu, GaussianData(locs, y), options);
}

FitResult fit_no_nugget(double nu, const GaussianData& data, const FitOptions& options) {
    if (data.size() < 3) throw DomainError("fit_no_nugget: need at least 3 observations");
    if (!(nu > 0.0)) throw DomainError("fit_no_nugget: nu must be positive");
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(1, std::log(phi_lower(nu, options)));
    const Eigen::VectorXd hi = Eigen::VectorXd::Constant(1, std::log(phi_upper(nu, options)));
    Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
        const double phi = std::exp(x(0));
        const auto e = profile_neg_loglik(phi, 0.0, nu, data, g != nullptr);
        if (g) *g = Eigen::VectorXd::Constant(1, phi * e.grad_phi);
        return e.value;
    };
    std::vector<Candidate> runs;
    const double ranges[] = {0.1, 0.3, 0.8};
    for (int k = 0; k < 3; ++k) {
        const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, std::log(phi_from_effective_range(ranges[k], nu)));
        runs.push_back({minimize_box(f, lo, hi, x0, optim_options(options)), k});
    }
    FitResult r;
    r.mode = FitMode::no_nugget;
    r.nu = nu;
    const Candidate* best = pick_best(runs);
    if (!best) {
        finish(r, runs, runs.front(), 0);
        fail(r, runs, "fit_no_nugget");
    }
    r.phi_hat = std::exp(best->opt.x(0));
    r.sigma2_hat = profile_neg_loglik(r.phi_hat, 0.0, nu, data).sigma2_hat;
    finish(r, runs, *best, 1);
    if (!r.converged) fail(r, runs, "fit_no_nugget");
    return r;
}

FitResult fit_no_nugget(double nu, const LocationSet& locs, const Eigen::VectorXd& y, const FitOptions& options) {
    return fit_no_nugget(nu, GaussianData(locs, y), options);
}

}  // namespace matern
