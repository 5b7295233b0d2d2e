#include "matern/simstudy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numeric>

#include "matern/error.hpp"
#include "matern/kriging.hpp"
#include "matern/likelihood.hpp"
#include "matern/parallel.hpp"

namespace matern {
namespace {

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

LocationSet perturbed_grid(Index n, std::uint64_t seed) {
    constexpr int m = kPerturbedGridSide;
    if (n < 1 || n > static_cast<Index>(m) * m)
        throw ConfigError("perturbed_grid_2d: n must lie in [1, " + std::to_string(m * m) + "]");
    Rng rng(seed);
    std::uniform_real_distribution<double> jitter(-kPerturbedGridJitter, kPerturbedGridJitter);
    Eigen::MatrixXd all(m * m, 2);
    auto sep_ok = [&](int gi, int gj) {
        const Index self = static_cast<Index>(gi) * m + gj;
        for (int di = -1; di <= 0; ++di) {
            for (int dj = -1; dj <= 1; ++dj) {
                if (di == 0 && dj >= 0) continue;
                const int oi = gi + di, oj = gj + dj;
                if (oi < 0 || oj < 0 || oj >= m) continue;
                const Index other = static_cast<Index>(oi) * m + oj;
                if ((all.row(self) - all.row(other)).norm() < kPerturbedGridMinSeparation) return false;
            }
        }
        return true;
    };
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const Index k = static_cast<Index>(i) * m + j;
            int tries = 0;
            do {
                if (++tries > 1000) throw NumericError("perturbed_grid_2d: separation rule could not be met");
                all(k, 0) = std::clamp(kPerturbedGridOrigin + kPerturbedGridStep * i + jitter(rng), 0.0, 1.0);
                all(k, 1) = std::clamp(kPerturbedGridOrigin + kPerturbedGridStep * j + jitter(rng), 0.0, 1.0);
            } while (!sep_ok(i, j));
        }
    }
    std::vector<Index> order(static_cast<std::size_t>(m * m));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(static_cast<std::size_t>(n));
    Eigen::MatrixXd c(n, 2);
    for (Index r = 0; r < n; ++r) c.row(r) = all.row(order[static_cast<std::size_t>(r)]);
    return LocationSet(2, std::move(c));
}

LocationSet regular_grid(int d, Index n) {
    const auto m = static_cast<Index>(std::llround(std::pow(static_cast<double>(n), 1.0 / d)));
    Index total = 1;
    for (int k = 0; k < d; ++k) total *= m;
    if (n < 1 || total != n) throw ConfigError("regular_grid: n must be a perfect d-th power");
    Eigen::MatrixXd c(n, d);
    for (Index r = 0; r < n; ++r) {
        Index rem = r;
        for (int k = d - 1; k >= 0; --k) {
            c(r, k) = static_cast<double>(rem % m) / static_cast<double>(m);
            rem /= m;
        }
    }
    return LocationSet(d, std::move(c));
}

LocationSet uniform_random(int d, Index n, std::uint64_t seed) {
    if (n < 1) throw ConfigError("uniform_random: n must be positive");
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd c(n, d);
    for (Index r = 0; r < n; ++r)
        for (int k = 0; k < d; ++k) c(r, k) = u(rng);
    return LocationSet(d, std::move(c));
}

std::string format_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = mix64(master);
    for (auto k : keys) h = mix64(h ^ mix64(k));
    return h;
}

std::string_view design_kind_name(DesignKind kind) {
    switch (kind) {
        case DesignKind::perturbed_grid_2d: return "perturbed_grid_2d";
        case DesignKind::regular_grid: return "regular_grid";
        case DesignKind::uniform_random: return "uniform_random";
    }
    return "unknown";
}

DesignKind parse_design_kind(std::string_view name) {
    if (name == "perturbed_grid_2d") return DesignKind::perturbed_grid_2d;
    if (name == "regular_grid") return DesignKind::regular_grid;
    if (name == "uniform_random") return DesignKind::uniform_random;
    throw ConfigError("unknown design kind '" + std::string(name) + "'");
}

LocationSet make_design(const DesignSpec& spec) {
    if (spec.d < 1 || spec.d > 3) throw ConfigError("design: d must be 1, 2 or 3");
    switch (spec.kind) {
        case DesignKind::perturbed_grid_2d:
            if (spec.d != 2) throw ConfigError("perturbed_grid_2d requires d = 2");
            return perturbed_grid(spec.n, spec.seed);
        case DesignKind::regular_grid: return regular_grid(spec.d, spec.n);
        case DesignKind::uniform_random: return uniform_random(spec.d, spec.n, spec.seed);
    }
    throw ConfigError("design: unknown kind");
}

GaussianSampler::GaussianSampler(const NoisyModelParams& params, const LocationSet& locs) : params_(params) {
    params_.validate();
    MaternParams m = params_.matern;
    factor_ = cholesky_with_jitter(build_cov_matrix(NoisyModelParams{m, 0.0}, locs), m.sigma2);
}

void GaussianSampler::draw(std::uint64_t seed, Eigen::VectorXd& w, Eigen::VectorXd& y) const {
    const Index n = factor_.size();
    Rng rng(seed);
    std::normal_distribution<double> g;
    Eigen::VectorXd z1(n), z2(n);
    for (Index i = 0; i < n; ++i) z1(i) = g(rng);
    for (Index i = 0; i < n; ++i) z2(i) = g(rng);
    w = factor_.lower.triangularView<Eigen::Lower>() * z1;
    y = w + std::sqrt(params_.tau2) * z2;
}

Eigen::VectorXd GaussianSampler::draw(std::uint64_t seed) const {
    Eigen::VectorXd w, y;
    draw(seed, w, y);
    return y;
}

Eigen::VectorXd sample_gp(const NoisyModelParams& params, const LocationSet& locs, std::uint64_t seed) {
    return GaussianSampler(params, locs).draw(seed);
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) return nan();
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("percentile: q outside [0,1]");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ReplicationSummary summarize(const std::vector<double>& values, double truth, int n_failed) {
    ReplicationSummary s;
    s.truth = truth;
    s.n_replicates = static_cast<int>(values.size());
    s.n_failed = n_failed;
    s.valid = 10 * n_failed <= s.n_replicates + n_failed;
    s.p5 = percentile(values, 0.05);
    s.p25 = percentile(values, 0.25);
    s.p50 = percentile(values, 0.50);
    s.p75 = percentile(values, 0.75);
    s.p95 = percentile(values, 0.95);
    if (values.empty()) {
        s.bias = s.sd = nan();
        return s;
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    s.bias = mean - truth;
    if (values.size() < 2) {
        s.sd = nan();
        return s;
    }
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    return s;
}

NoisyModelParams SimSetting::params() const {
    return NoisyModelParams{{sigma2, phi_from_effective_range(range, nu), nu}, tau2};
}

std::string SimSetting::id() const {
    return "tau2=" + format_g(tau2) + ";sigma2=" + format_g(sigma2) + ";range=" + format_g(range) +
           ";nu=" + format_g(nu);
}

ReplicationOutput run_replications(const ReplicationConfig& cfg) {
    if (cfg.settings.empty()) throw ConfigError("replications: no settings");
    if (cfg.n_list.empty()) throw ConfigError("replications: empty n_list");
    if (cfg.n_reps < 1) throw ConfigError("replications: n_reps must be positive");
    for (const auto& s : cfg.settings) {
        if (!(s.nu > 0.0) || !(s.sigma2 > 0.0) || !(s.range > 0.0) || !(s.tau2 >= 0.0))
            throw ConfigError("replications: invalid setting " + s.id());
    }
    const Index n_max = *std::max_element(cfg.n_list.begin(), cfg.n_list.end());
    const LocationSet design =
        make_design(DesignSpec{cfg.design, cfg.d, n_max, derive_seed(cfg.seed, {kDesignSeedKey})});
    const Eigen::MatrixXd dist = distance_matrix(design);

    const std::size_t n_settings = cfg.settings.size();
    const std::size_t n_sizes = cfg.n_list.size();
    const auto reps = static_cast<std::size_t>(cfg.n_reps);

    std::vector<GaussianSampler> samplers;
    for (const auto& s : cfg.settings) samplers.emplace_back(s.params(), design);

    // Fixed-decay fits share one decomposition per (setting, n).
    std::vector<EigenDecomposition> eig;
    if (cfg.estimator == FitMode::fixed_phi) {
        eig.resize(n_settings * n_sizes);
        parallel_for(eig.size(), cfg.threads, [&](std::size_t k) {
            const auto p = cfg.settings[k / n_sizes].params();
            const Index n = cfg.n_list[k % n_sizes];
            eig[k] = eigen_sym_full(correlation_matrix(p.matern.phi, p.matern.nu, dist.topLeftCorner(n, n)));
        });
    }
    std::vector<Eigen::MatrixXd> prefix_dist;
    for (Index n : cfg.n_list) prefix_dist.emplace_back(dist.topLeftCorner(n, n));

    ReplicationOutput out;
    out.records.resize(n_settings * n_sizes * reps);
    std::mutex progress_mu;
    parallel_for(n_settings * reps, cfg.threads, [&](std::size_t task) {
        const std::size_t s = task / reps;
        const std::size_t r = task % reps;
        const auto& setting = cfg.settings[s];
        const Eigen::VectorXd y_full = samplers[s].draw(derive_seed(cfg.seed, {kDataSeedKey, s, r}));
        for (std::size_t k = 0; k < n_sizes; ++k) {
            const Index n = cfg.n_list[k];
            ReplicateRecord& rec = out.records[(s * n_sizes + k) * reps + r];
            rec.setting = static_cast<int>(s);
            rec.n = n;
            rec.replicate = static_cast<int>(r);
            const Eigen::VectorXd y = y_full.head(n);
            try {
                switch (cfg.estimator) {
                    case FitMode::profile:
                        rec.fit = fit_profile(setting.nu, GaussianData(prefix_dist[k], y), cfg.fit_options);
                        break;
                    case FitMode::no_nugget:
                        rec.fit = fit_no_nugget(setting.nu, GaussianData(prefix_dist[k], y), cfg.fit_options);
                        break;
                    case FitMode::fixed_phi:
                        rec.fit = fit_fixed_phi(samplers[s].params().matern.phi, setting.nu, default_box(y),
                                                eig[s * n_sizes + k], y, cfg.fit_options);
                        break;
                }
                rec.ok = true;
            } catch (const FitFailure& e) {
                rec.fit = e.best();
                rec.error = e.what();
            } catch (const Error& e) {
                rec.error = e.what();
            }
            if (cfg.progress) {
                std::lock_guard lock(progress_mu);
                cfg.progress(rec);
            }
        }
    });
    out.summaries = summarize_records(out.records, cfg.settings, cfg.n_list);
    return out;
}

std::vector<ReplicationSummary> summarize_records(const std::vector<ReplicateRecord>& records,
                                                  const std::vector<SimSetting>& settings,
                                                  const std::vector<Index>& n_list) {
    std::vector<ReplicationSummary> out;
    for (std::size_t s = 0; s < settings.size(); ++s) {
        const auto truth = settings[s].params();
        for (Index n : n_list) {
            std::vector<double> tau2, sigma2, phi, kappa;
            int failed = 0;
            for (const auto& r : records) {
                if (r.setting != static_cast<int>(s) || r.n != n) continue;
                if (!r.ok) {
                    ++failed;
                    continue;
                }
                tau2.push_back(r.fit.tau2_hat);
                sigma2.push_back(r.fit.sigma2_hat);
                phi.push_back(r.fit.phi_hat);
                kappa.push_back(r.fit.kappa_hat);
            }
            const std::pair<const char*, std::pair<const std::vector<double>*, double>> cols[] = {
                {"tau2", {&tau2, truth.tau2}},
                {"sigma2", {&sigma2, truth.matern.sigma2}},
                {"phi", {&phi, truth.matern.phi}},
                {"kappa", {&kappa, truth.matern.kappa()}},
            };
            for (const auto& [name, data] : cols) {
                auto sum = summarize(*data.first, data.second, failed);
                sum.setting = settings[s].id();
                sum.estimator = name;
                sum.n = n;
                out.push_back(std::move(sum));
            }
        }
    }
    return out;
}

std::string_view surface_fixed_name(SurfaceFixed f) {
    switch (f) {
        case SurfaceFixed::sigma2: return "sigma2";
        case SurfaceFixed::kappa: return "kappa";
        case SurfaceFixed::tau2: return "tau2";
    }
    return "unknown";
}

SurfaceFixed parse_surface_fixed(std::string_view name) {
    if (name == "sigma2") return SurfaceFixed::sigma2;
    if (name == "kappa") return SurfaceFixed::kappa;
    if (name == "tau2") return SurfaceFixed::tau2;
    throw ConfigError("unknown surface constraint '" + std::string(name) + "'");
}

std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 1) throw ConfigError("linspace: count must be positive");
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        v[static_cast<std::size_t>(i)] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    return v;
}

SurfaceGrid likelihood_surface(const LocationSet& locs, const Eigen::VectorXd& y, const SurfaceSpec& spec,
                               int threads) {
    if (y.size() != locs.size()) throw DomainError("likelihood_surface: y length differs from design");
    if (spec.phi.empty() || spec.second.empty()) throw ConfigError("likelihood_surface: empty axis");
    const auto& truth = spec.truth;
    const double nu = truth.matern.nu;
    SurfaceGrid g;
    g.axis2 = spec.fixed == SurfaceFixed::tau2 ? "sigma2" : "tau2";
    g.fixed = std::string(surface_fixed_name(spec.fixed));
    g.axis1_values = spec.phi;
    g.axis2_values = spec.second;
    const auto rows = static_cast<Index>(spec.phi.size());
    const auto cols = static_cast<Index>(spec.second.size());
    g.loglik.resize(rows, cols);
    g.sigma2.resize(rows, cols);
    g.tau2.resize(rows, cols);
    g.pd.resize(rows, cols);
    const Eigen::MatrixXd dist = distance_matrix(locs);
    parallel_for(spec.phi.size(), threads, [&](std::size_t i) {
        const double phi = spec.phi[i];
        const auto eig = eigen_sym_full(correlation_matrix(phi, nu, dist));
        const Eigen::VectorXd z = eig.rotate(y);
        const auto r = static_cast<Index>(i);
        for (Index c = 0; c < cols; ++c) {
            const double v = spec.second[static_cast<std::size_t>(c)];
            double s2 = 0.0, t2 = 0.0;
            switch (spec.fixed) {
                case SurfaceFixed::sigma2: s2 = truth.matern.sigma2; t2 = v; break;
                case SurfaceFixed::kappa: s2 = truth.matern.kappa() / std::pow(phi, 2.0 * nu); t2 = v; break;
                case SurfaceFixed::tau2: s2 = v; t2 = truth.tau2; break;
            }
            g.sigma2(r, c) = s2;
            g.tau2(r, c) = t2;
            const double l = (s2 > 0.0 && t2 >= 0.0)
                                 ? neg_loglik_eigenpath(NoisyModelParams{{s2, phi, nu}, t2}, eig.spectrum, z)
                                 : std::numeric_limits<double>::infinity();
            g.pd(r, c) = std::isfinite(l);
            g.loglik(r, c) = std::isfinite(l) ? loglik_plot_scale(l) : nan();
        }
    });
    return g;
}

std::vector<MspeRow> mspe_sweep(const NoisyModelParams& truth, const LocationSet& design,
                                const std::vector<Index>& n_list,
                                const std::vector<std::array<double, 3>>& holdout,
                                const std::vector<LabeledParams>& fits, int threads) {
    std::vector<LabeledParams> models = fits;
    if (models.empty()) models.push_back({"truth", truth});
    for (Index n : n_list)
        if (n < 0 || n > design.size()) throw ConfigError("mspe_sweep: n exceeds the design size");
    const std::size_t per_n = models.size();
    std::vector<MspeBatch> batches(n_list.size() * per_n);
    parallel_for(batches.size(), threads, [&](std::size_t k) {
        const LocationSet locs = design.prefix(n_list[k / per_n]);
        batches[k] = mspe_batch(models[k % per_n].params, truth, locs, holdout);
    });
    std::vector<MspeRow> rows;
    for (std::size_t k = 0; k < batches.size(); ++k) {
        for (std::size_t p = 0; p < holdout.size(); ++p) {
            MspeRow row;
            row.n = n_list[k / per_n];
            row.point = static_cast<int>(p);
            row.s0 = holdout[p];
            row.fit_label = models[k % per_n].label;
            const auto i = static_cast<Index>(p);
            row.mspe = batches[k].realized(i);
            row.mspe_truth = batches[k].at_truth(i);
            row.mspe_asserted = batches[k].asserted(i);
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace matern
