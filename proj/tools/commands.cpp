#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <thread>

#include "cli_io.hpp"
#include "matern/eigendiag.hpp"
#include "matern/estimation.hpp"
#include "matern/kriging.hpp"
#include "matern/simd.hpp"
#include "matern/simstudy.hpp"

namespace matern::cli {
namespace {

struct Context {
    json config;      // as loaded
    json effective;   // values actually used, echoed to the manifest
    std::uint64_t seed = 1;
    int threads = 1;
    fs::path dir;
    Manifest* manifest = nullptr;
};

template <class Body>
int run(const std::string& name, const CommonFlags& common, std::initializer_list<const char*> keys, Body body) {
    const fs::path dir(common.out_dir);
    try {
        fs::create_directories(dir);
    } catch (const std::exception& e) {
        std::cerr << "matern " << name << ": " << e.what() << '\n';
        return kRuntime;
    }
    Manifest manifest(dir, name);
    int code = kOk;
    std::string error;
    try {
        if (common.isa) {
            try {
                simd::set_active_isa(simd::parse_isa(*common.isa));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("--isa: ") + e.what());
            }
        }
        manifest.set("isa", std::string(simd::isa_name(simd::active_isa())));
        Context ctx;
        ctx.config = load_config(common.config);
        manifest.set_config(ctx.config);
        check_keys(ctx.config, keys, "config");
        ctx.seed = common.seed ? *common.seed : get_or<std::uint64_t>(ctx.config, "seed", 1);
        const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        ctx.threads = common.threads ? *common.threads : get_or(ctx.config, "threads", hw);
        if (ctx.threads < 1) throw ConfigError("threads must be positive");
        ctx.dir = dir;
        ctx.manifest = &manifest;
        ctx.effective = json::object();
        manifest.set("seed", ctx.seed);
        manifest.set("threads", ctx.threads);
        if (common.config) manifest.set("config_file", *common.config);
        body(ctx);
        manifest.set("effective_config", ctx.effective);
    } catch (const NoConvergence& e) {
        code = kNoConvergence;
        error = e.what();
    } catch (const ConfigError& e) {
        code = kConfig;
        error = e.what();
    } catch (const std::exception& e) {
        code = kRuntime;
        error = e.what();
    }
    manifest.finish(code, error);
    if (!error.empty()) std::cerr << "matern " << name << ": " << error << '\n';
    return code;
}

std::vector<Index> index_list(const json& cfg, const char* key, std::vector<Index> fallback) {
    const auto v = get_or(cfg, key, std::vector<long long>(fallback.begin(), fallback.end()));
    if (v.empty()) throw ConfigError(std::string(key) + ": must not be empty");
    std::vector<Index> out;
    for (long long x : v) {
        if (x < 1) throw ConfigError(std::string(key) + ": entries must be positive");
        out.push_back(static_cast<Index>(x));
    }
    return out;
}

FitOptions parse_fit_options(const json& cfg) {
    FitOptions o;
    if (!cfg.contains("fit_options")) return o;
    const json& f = cfg.at("fit_options");
    check_keys(f, {"max_iter", "gtol", "ftol", "eta_min", "eta_max", "range_min", "range_max", "refine_top"},
               "fit_options");
    o.max_iter = get_or(f, "max_iter", o.max_iter);
    o.gtol = get_or(f, "gtol", o.gtol);
    o.ftol = get_or(f, "ftol", o.ftol);
    o.eta_min = get_or(f, "eta_min", o.eta_min);
    o.eta_max = get_or(f, "eta_max", o.eta_max);
    o.range_min = get_or(f, "range_min", o.range_min);
    o.range_max = get_or(f, "range_max", o.range_max);
    o.refine_top = get_or(f, "refine_top", o.refine_top);
    if (o.max_iter < 1 || !(o.gtol > 0.0) || !(o.ftol >= 0.0) || !(o.eta_min > 0.0) || !(o.eta_max > o.eta_min) ||
        !(o.range_min > 0.0) || !(o.range_max > o.range_min) || o.refine_top < 1)
        throw ConfigError("fit_options: invalid value");
    return o;
}

json fit_options_json(const FitOptions& o) {
    return {{"max_iter", o.max_iter},   {"gtol", o.gtol},           {"ftol", o.ftol},
            {"eta_min", o.eta_min},     {"eta_max", o.eta_max},     {"range_min", o.range_min},
            {"range_max", o.range_max}, {"refine_top", o.refine_top}};
}

json params_json(const NoisyModelParams& p) {
    return {{"tau2", p.tau2}, {"sigma2", p.matern.sigma2}, {"phi", p.matern.phi}, {"nu", p.matern.nu}};
}

json fit_json(const FitResult& f) {
    json j = {{"mode", std::string(fit_mode_name(f.mode))},
              {"nu", f.nu},
              {"tau2_hat", f.tau2_hat},
              {"sigma2_hat", f.sigma2_hat},
              {"phi_hat", f.phi_hat},
              {"kappa_hat", f.kappa_hat},
              {"eta_hat", f.eta_hat},
              {"neg_loglik", f.neg_loglik},
              {"converged", f.converged},
              {"hit_boundary", f.hit_boundary},
              {"iterations", f.iterations},
              {"n_evals", f.n_evals},
              {"grad_norm", f.grad_norm},
              {"starts", f.starts},
              {"starts_converged", f.starts_converged},
              {"message", f.message}};
    if (f.mode == FitMode::fixed_phi)
        j["box"] = {{"tau2_lo", f.box.tau2_lo},
                    {"tau2_hi", f.box.tau2_hi},
                    {"sigma2_lo", f.box.sigma2_lo},
                    {"sigma2_hi", f.box.sigma2_hi}};
    return j;
}

DesignKind design_kind(const json& cfg, DesignKind fallback) {
    if (!cfg.contains("design")) return fallback;
    return parse_design_kind(get_or<std::string>(cfg, "design", ""));
}

std::string g_name(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::vector<double> axis(const json& cfg, const char* key, double lo, double hi, int count) {
    if (cfg.contains(key)) {
        const json& a = cfg.at(key);
        check_keys(a, {"from", "to", "count"}, key);
        lo = get_or(a, "from", lo);
        hi = get_or(a, "to", hi);
        count = get_or(a, "count", count);
    }
    if (!(hi >= lo)) throw ConfigError(std::string(key) + ": need from <= to");
    return linspace(lo, hi, count);
}

// Least-squares slope of log y on log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const auto m = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

int cmd_simulate(const CommonFlags& common, const ModelFlags& model) {
    return run("simulate", common,
               {"settings", "n_list", "n_reps", "estimator", "seed", "threads", "design", "d", "fit", "write_data",
                "fit_options"},
               [&](Context& ctx) {
        const json& cfg = ctx.config;
        if (model.phi_fixed) throw ConfigError("--phi-fixed applies to fit; simulate fixes phi at each setting's truth");
        ReplicationConfig rc;
        rc.seed = ctx.seed;
        rc.threads = ctx.threads;
        rc.settings.clear();
        if (cfg.contains("settings")) {
            if (!cfg.at("settings").is_array() || cfg.at("settings").empty())
                throw ConfigError("settings: expected a non-empty array");
            for (const auto& s : cfg.at("settings")) {
                check_keys(s, {"tau2", "sigma2", "range", "nu"}, "settings");
                SimSetting st;
                st.tau2 = get_or(s, "tau2", st.tau2);
                st.sigma2 = get_or(s, "sigma2", st.sigma2);
                st.range = get_or(s, "range", st.range);
                st.nu = get_or(s, "nu", st.nu);
                rc.settings.push_back(st);
            }
        } else {
            rc.settings.push_back(SimSetting{});
        }
        for (auto& s : rc.settings) {
            if (model.nu) s.nu = *model.nu;
            if (!(s.nu > 0.0) || !std::isfinite(s.nu)) throw ConfigError("settings: nu must be positive");
            if (!(s.sigma2 > 0.0) || !(s.range > 0.0) || !(s.tau2 >= 0.0))
                throw ConfigError("settings: need sigma2 > 0, range > 0, tau2 >= 0");
        }
        rc.n_list = index_list(cfg, "n_list", {400, 900, 1600});
        rc.n_reps = get_or(cfg, "n_reps", 200);
        if (rc.n_reps < 1) throw ConfigError("n_reps must be positive");
        if (rc.n_reps < 30) std::cerr << "matern simulate: n_reps < 30, SD summaries will be noisy\n";
        rc.estimator = parse_fit_mode(model.mode ? *model.mode : get_or<std::string>(cfg, "estimator", "profile"));
        rc.design = design_kind(cfg, DesignKind::perturbed_grid_2d);
        rc.d = get_or(cfg, "d", 2);
        rc.fit_options = parse_fit_options(cfg);
        const bool do_fit = get_or(cfg, "fit", true);
        const int write_data = get_or(cfg, "write_data", 0);
        if (write_data < 0 || write_data > rc.n_reps) throw ConfigError("write_data must lie in [0, n_reps]");

        json settings = json::array();
        for (const auto& s : rc.settings) {
            json js = {{"tau2", s.tau2}, {"sigma2", s.sigma2}, {"range", s.range}, {"nu", s.nu}};
            js["phi"] = s.params().matern.phi;
            js["id"] = s.id();
            settings.push_back(js);
        }
        ctx.effective = {{"settings", settings},
                         {"n_list", rc.n_list},
                         {"n_reps", rc.n_reps},
                         {"estimator", std::string(fit_mode_name(rc.estimator))},
                         {"seed", rc.seed},
                         {"design", std::string(design_kind_name(rc.design))},
                         {"d", rc.d},
                         {"fit", do_fit},
                         {"write_data", write_data},
                         {"fit_options", fit_options_json(rc.fit_options)}};

        if (write_data > 0) {
            Stopwatch sw;
            const Index n_max = *std::max_element(rc.n_list.begin(), rc.n_list.end());
            const LocationSet design =
                make_design(DesignSpec{rc.design, rc.d, n_max, derive_seed(rc.seed, {kDesignSeedKey})});
            for (std::size_t s = 0; s < rc.settings.size(); ++s) {
                const GaussianSampler sampler(rc.settings[s].params(), design);
                for (int r = 0; r < write_data; ++r) {
                    const Eigen::VectorXd y = sampler.draw(derive_seed(rc.seed, {kDataSeedKey, s, static_cast<std::uint64_t>(r)}));
                    write_data_csv(ctx.manifest->output("data_s" + std::to_string(s) + "_r" + std::to_string(r) + ".csv"),
                                   design, y);
                }
            }
            ctx.manifest->stage("write_data", sw.seconds());
        }
        if (!do_fit) return;

        Stopwatch sw;
        const auto out = run_replications(rc);
        ctx.manifest->stage("replications", sw.seconds());

        CsvWriter rec(ctx.manifest->output("replicates.csv"),
                      {"setting", "n", "replicate", "ok", "tau2_hat", "sigma2_hat", "phi_hat", "kappa_hat", "eta_hat",
                       "neg_loglik", "converged", "hit_boundary", "iterations", "grad_norm", "error"});
        int failed = 0;
        for (const auto& r : out.records) {
            failed += r.ok ? 0 : 1;
            rec << r.setting << static_cast<long long>(r.n) << r.replicate << r.ok << r.fit.tau2_hat << r.fit.sigma2_hat
                << r.fit.phi_hat << r.fit.kappa_hat << r.fit.eta_hat << r.fit.neg_loglik << r.fit.converged
                << r.fit.hit_boundary << r.fit.iterations << r.fit.grad_norm << r.error;
            rec.end_row();
        }
        CsvWriter sum(ctx.manifest->output("summary.csv"),
                      {"setting", "estimator", "n", "truth", "p5", "p25", "p50", "p75", "p95", "bias", "sd",
                       "n_replicates", "n_failed", "valid"});
        for (const auto& s : out.summaries) {
            sum << s.setting << s.estimator << static_cast<long long>(s.n) << s.truth << s.p5 << s.p25 << s.p50
                << s.p75 << s.p95 << s.bias << s.sd << s.n_replicates << s.n_failed << s.valid;
            sum.end_row();
        }
        ctx.manifest->set("failed_fits", failed);
    });
}

int cmd_fit(const CommonFlags& common, const ModelFlags& model) {
    return run("fit", common, {"data", "nu", "mode", "phi_fixed", "box", "fit_options", "seed", "threads"},
               [&](Context& ctx) {
        const json& cfg = ctx.config;
        const std::string path = model.data ? *model.data : get_or<std::string>(cfg, "data", "");
        if (path.empty()) throw ConfigError("fit: no data file given");
        const double nu = model.nu ? *model.nu : get_or(cfg, "nu", 0.5);
        if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("nu must be positive");
        const FitMode mode = parse_fit_mode(model.mode ? *model.mode : get_or<std::string>(cfg, "mode", "profile"));
        const FitOptions opts = parse_fit_options(cfg);

        Stopwatch sw;
        const DataFile data = read_data_csv(path);
        ctx.manifest->stage("read", sw.seconds());
        ctx.effective = {{"data", path}, {"nu", nu}, {"mode", std::string(fit_mode_name(mode))},
                         {"n", data.y.size()}, {"d", data.locs.dim()}, {"fit_options", fit_options_json(opts)}};

        FitResult fit;
        std::string failure;
        Stopwatch fw;
        try {
            switch (mode) {
                case FitMode::profile:
                    fit = fit_profile(nu, data.locs, data.y, opts);
                    break;
                case FitMode::no_nugget:
                    fit = fit_no_nugget(nu, data.locs, data.y, opts);
                    break;
                case FitMode::fixed_phi: {
                    const double phi1 = model.phi_fixed ? *model.phi_fixed : get_or(cfg, "phi_fixed", 0.0);
                    if (!(phi1 > 0.0)) throw ConfigError("fixed-phi mode needs --phi-fixed > 0");
                    Box2 box = default_box(data.y);
                    if (cfg.contains("box")) {
                        const json& b = cfg.at("box");
                        check_keys(b, {"tau2_lo", "tau2_hi", "sigma2_lo", "sigma2_hi"}, "box");
                        box.tau2_lo = get_or(b, "tau2_lo", box.tau2_lo);
                        box.tau2_hi = get_or(b, "tau2_hi", box.tau2_hi);
                        box.sigma2_lo = get_or(b, "sigma2_lo", box.sigma2_lo);
                        box.sigma2_hi = get_or(b, "sigma2_hi", box.sigma2_hi);
                        try {
                            box.validate();
                        } catch (const DomainError& e) {
                            throw ConfigError(std::string("box: ") + e.what());
                        }
                    }
                    ctx.effective["phi_fixed"] = phi1;
                    fit = fit_fixed_phi(phi1, nu, box, data.locs, data.y, opts);
                    break;
                }
            }
        } catch (const FitFailure& e) {
            fit = e.best();
            failure = e.what();
        }
        ctx.manifest->stage("fit", fw.seconds());
        const json out = fit_json(fit);
        std::ofstream(ctx.manifest->output("fit.json")) << out.dump(2) << '\n';
        std::cout << out.dump(2) << '\n';
        if (!failure.empty()) throw NoConvergence(failure);
        if (!fit.converged) throw NoConvergence("fit did not converge: " + fit.message);
    });
}

int cmd_eigscan(const CommonFlags& common, const ModelFlags& model) {
    return run("eigscan", common,
               {"nu", "sigma2", "phi", "d", "n_list", "alpha_list", "lemma_tau2", "seed", "threads"},
               [&](Context& ctx) {
        const json& cfg = ctx.config;
        std::vector<double> nus;
        if (model.nu) {
            nus = {*model.nu};
        } else if (cfg.contains("nu") && cfg.at("nu").is_number()) {
            nus = {get_or(cfg, "nu", 0.9)};
        } else {
            nus = get_or(cfg, "nu", std::vector<double>{0.9, 1.5});
        }
        DecayScanSpec spec;
        spec.sigma2 = get_or(cfg, "sigma2", 1.0);
        spec.phi = get_or(cfg, "phi", 1.0);
        spec.d = get_or(cfg, "d", 1);
        spec.n_list = index_list(cfg, "n_list", {100, 200, 500, 1000, 2000, 3000});
        spec.alpha_list = get_or(cfg, "alpha_list", spec.alpha_list);
        const double lemma_tau2 = get_or(cfg, "lemma_tau2", 0.2);
        if (nus.empty()) throw ConfigError("nu: must not be empty");
        for (double nu : nus)
            if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("nu must be positive");
        if (!(spec.sigma2 > 0.0) || !(spec.phi > 0.0) || !(lemma_tau2 > 0.0))
            throw ConfigError("sigma2, phi and lemma_tau2 must be positive");
        if (spec.d < 1 || spec.d > 3) throw ConfigError("d must be 1, 2 or 3");
        for (double a : spec.alpha_list)
            if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("alpha_list: entries must lie in [0, 1]");
        for (Index n : spec.n_list)
            if (n > kMaxDenseEigenN) throw ConfigError("n_list: n above the dense eigensolver limit");
        ctx.effective = {{"nu", nus},         {"sigma2", spec.sigma2},         {"phi", spec.phi},
                         {"d", spec.d},       {"n_list", spec.n_list},         {"alpha_list", spec.alpha_list},
                         {"lemma_tau2", lemma_tau2}};

        json estimates = json::array();
        for (double nu : nus) {
            spec.nu = nu;
            Stopwatch sw;
            const auto reports = decay_scan(spec, ctx.threads);
            ctx.manifest->stage("decay_scan nu=" + g_name(nu), sw.seconds());
            const std::string tag = "nu" + g_name(nu);
            CsvWriter w(ctx.manifest->output("decay_" + tag + ".csv"), {"n", "alpha", "i", "lambda", "ratio"});
            CsvWriter b(ctx.manifest->output("decay_bounds_" + tag + ".csv"),
                        {"n", "max_ratio_all", "ratio_first", "ratio_last", "c1_hat", "c2_hat", "c3_hat"});
            for (const auto& r : reports) {
                for (std::size_t k = 0; k < r.indices.size(); ++k) {
                    w << static_cast<long long>(r.n) << r.alphas[k] << static_cast<long long>(r.indices[k])
                      << r.lambdas[k] << r.ratios[k];
                    w.end_row();
                }
                EigenSpectrum unit{r.spectrum.values / spec.sigma2};
                const auto l = lemma_sums(lemma_tau2, spec.sigma2, unit, nu, spec.d);
                b << static_cast<long long>(r.n) << r.max_ratio_all << r.ratio_first << r.ratio_last << l.c1_hat
                  << l.c2_hat << l.c3_hat;
                b.end_row();
            }
            // Assumption-2 constant: median ratio at the largest n (an estimate, not a closed form).
            const auto& last = *std::max_element(reports.begin(), reports.end(),
                                                 [](const auto& a, const auto& c) { return a.n < c.n; });
            estimates.push_back({{"nu", nu}, {"n", last.n}, {"A_estimate", percentile(last.ratios, 0.5)}});
        }
        ctx.manifest->set("estimates", estimates);
    });
}

int cmd_likmap(const CommonFlags& common, const ModelFlags& model) {
    return run("likmap", common,
               {"truth", "design_n", "n", "design", "d", "fixed", "phi", "tau2", "sigma2", "seed", "threads"},
               [&](Context& ctx) {
        const json& cfg = ctx.config;
        json truth_cfg = cfg.contains("truth") ? cfg.at("truth") : json::object();
        if (model.nu) truth_cfg["nu"] = *model.nu;
        const NoisyModelParams truth = parse_params(truth_cfg, "truth");
        const Index n = get_or(cfg, "n", 900);
        const Index design_n = get_or(cfg, "design_n", std::max<Index>(1600, n));
        if (n < 3 || n > design_n) throw ConfigError("need 3 <= n <= design_n");
        const DesignKind kind = design_kind(cfg, DesignKind::perturbed_grid_2d);
        const int d = get_or(cfg, "d", 2);
        const auto fixed_names = get_or(cfg, "fixed", std::vector<std::string>{"sigma2", "kappa", "tau2"});
        const auto phi = axis(cfg, "phi", 2.5, 30.0, 56);
        const auto tau2 = axis(cfg, "tau2", 0.0, 1.0, 51);
        const auto sigma2 = axis(cfg, "sigma2", 0.2, 4.2, 41);
        ctx.effective = {{"truth", params_json(truth)},
                         {"design_n", design_n},
                         {"n", n},
                         {"design", std::string(design_kind_name(kind))},
                         {"d", d},
                         {"fixed", fixed_names},
                         {"phi", {{"from", phi.front()}, {"to", phi.back()}, {"count", phi.size()}}},
                         {"tau2", {{"from", tau2.front()}, {"to", tau2.back()}, {"count", tau2.size()}}},
                         {"sigma2", {{"from", sigma2.front()}, {"to", sigma2.back()}, {"count", sigma2.size()}}}};

        // The first realization of setting 0 under this seed, restricted to
        // the first n points of the shuffled design (a uniform random subset).
        Stopwatch sw;
        const LocationSet design = make_design(DesignSpec{kind, d, design_n, derive_seed(ctx.seed, {kDesignSeedKey})});
        const Eigen::VectorXd y_full = sample_gp(truth, design, derive_seed(ctx.seed, {kDataSeedKey, 0, 0}));
        const LocationSet locs = design.prefix(n);
        const Eigen::VectorXd y = y_full.head(n);
        write_data_csv(ctx.manifest->output("data.csv"), locs, y);
        ctx.manifest->stage("data", sw.seconds());

        json argmax = json::array();
        for (const auto& name : fixed_names) {
            const SurfaceFixed fixed = parse_surface_fixed(name);
            const SurfaceSpec spec{fixed, phi, fixed == SurfaceFixed::tau2 ? sigma2 : tau2, truth};
            Stopwatch ss;
            const auto g = likelihood_surface(locs, y, spec, ctx.threads);
            ctx.manifest->stage("surface " + name, ss.seconds());
            CsvWriter w(ctx.manifest->output("surface_" + name + ".csv"),
                        {"phi", "sigma2", "tau2", "kappa", "loglik", "pd"});
            double best = -INFINITY;
            Index bi = 0, bj = 0;
            for (Index i = 0; i < g.loglik.rows(); ++i) {
                for (Index j = 0; j < g.loglik.cols(); ++j) {
                    const double phi_i = g.axis1_values[static_cast<std::size_t>(i)];
                    w << phi_i << g.sigma2(i, j) << g.tau2(i, j)
                      << g.sigma2(i, j) * std::pow(phi_i, 2.0 * truth.matern.nu) << g.loglik(i, j)
                      << static_cast<bool>(g.pd(i, j));
                    w.end_row();
                    if (g.pd(i, j) && g.loglik(i, j) > best) {
                        best = g.loglik(i, j);
                        bi = i;
                        bj = j;
                    }
                }
            }
            argmax.push_back({{"fixed", name},
                              {"phi", g.axis1_values[static_cast<std::size_t>(bi)]},
                              {g.axis2, g.axis2_values[static_cast<std::size_t>(bj)]},
                              {"loglik", best}});
        }
        ctx.manifest->set("argmax", argmax);
    });
}

int cmd_krig(const CommonFlags& common, const ModelFlags& model) {
    return run("krig", common,
               {"truth", "d", "design", "n_list", "holdout", "holdout_grid", "fits", "seed", "threads"},
               [&](Context& ctx) {
        const json& cfg = ctx.config;
        json truth_cfg = cfg.contains("truth") ? cfg.at("truth") : json::object();
        if (model.nu) truth_cfg["nu"] = *model.nu;
        const NoisyModelParams truth = parse_params(truth_cfg, "truth");
        const int d = get_or(cfg, "d", 1);
        if (d < 1 || d > 3) throw ConfigError("d must be 1, 2 or 3");
        const DesignKind kind = design_kind(cfg, d == 2 ? DesignKind::perturbed_grid_2d : DesignKind::uniform_random);
        const auto n_list = index_list(cfg, "n_list",
                                       d == 1 ? std::vector<Index>{500, 707, 1000, 1414, 2000, 2828, 4000}
                                              : std::vector<Index>{400, 900, 1600});

        std::vector<std::array<double, 3>> hold;
        if (cfg.contains("holdout") && cfg.contains("holdout_grid"))
            throw ConfigError("give holdout or holdout_grid, not both");
        if (cfg.contains("holdout")) {
            for (const auto& p : get_or(cfg, "holdout", std::vector<std::vector<double>>{})) {
                if (static_cast<int>(p.size()) != d) throw ConfigError("holdout: each point needs d coordinates");
                std::array<double, 3> s{};
                for (int k = 0; k < d; ++k) {
                    s[static_cast<std::size_t>(k)] = p[static_cast<std::size_t>(k)];
                    if (!(p[static_cast<std::size_t>(k)] >= 0.0 && p[static_cast<std::size_t>(k)] <= 1.0))
                        throw ConfigError("holdout: coordinates must lie in [0, 1]");
                }
                hold.push_back(s);
            }
        } else if (cfg.contains("holdout_grid") || d == 2) {
            // Cell centres of an m^d evaluation grid.
            const int m = get_or(cfg, "holdout_grid", 50);
            if (m < 1) throw ConfigError("holdout_grid must be positive");
            const Index total = static_cast<Index>(std::pow(m, d));
            for (Index t = 0; t < total; ++t) {
                std::array<double, 3> s{};
                Index rest = t;
                for (int k = 0; k < d; ++k) {
                    s[static_cast<std::size_t>(k)] = (static_cast<double>(rest % m) + 0.5) / m;
                    rest /= m;
                }
                hold.push_back(s);
            }
        } else {
            hold = {{0.25, 0, 0}, {0.5, 0, 0}, {0.75, 0, 0}};
        }
        if (hold.empty()) throw ConfigError("no hold-out points");

        std::vector<LabeledParams> fits;
        if (cfg.contains("fits")) {
            if (!cfg.at("fits").is_array()) throw ConfigError("fits: expected an array");
            for (const auto& f : cfg.at("fits")) {
                if (!f.is_object() || !f.contains("label")) throw ConfigError("fits: each entry needs a label");
                json p = f;
                p.erase("label");
                fits.push_back({get_or<std::string>(f, "label", ""), parse_params(p, "fits")});
            }
        }
        json fits_echo = json::array();
        for (const auto& f : fits) {
            json j = params_json(f.params);
            j["label"] = f.label;
            fits_echo.push_back(j);
        }
        ctx.effective = {{"truth", params_json(truth)}, {"d", d}, {"design", std::string(design_kind_name(kind))},
                         {"n_list", n_list},            {"holdout_points", hold.size()}, {"fits", fits_echo}};

        Stopwatch sw;
        const Index n_max = *std::max_element(n_list.begin(), n_list.end());
        const LocationSet design = make_design(DesignSpec{kind, d, n_max, derive_seed(ctx.seed, {kDesignSeedKey})});
        const auto rows = mspe_sweep(truth, design, n_list, hold, fits, ctx.threads);
        ctx.manifest->stage("mspe_sweep", sw.seconds());

        static const char* names[] = {"x", "y", "z"};
        std::vector<std::string> header{"n", "point"};
        for (int k = 0; k < d; ++k) header.emplace_back(names[k]);
        for (const char* c : {"fit", "mspe", "mspe_truth", "mspe_asserted"}) header.emplace_back(c);
        CsvWriter w(ctx.manifest->output("mspe.csv"), header);
        for (const auto& r : rows) {
            w << static_cast<long long>(r.n) << r.point;
            for (int k = 0; k < d; ++k) w << r.s0[static_cast<std::size_t>(k)];
            w << r.fit_label << r.mspe << r.mspe_truth << r.mspe_asserted;
            w.end_row();
        }

        std::vector<Index> distinct = n_list;
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        if (distinct.size() < 2) return;
        CsvWriter s(ctx.manifest->output("mspe_slope.csv"), {"fit", "point", "slope_mspe", "slope_mspe_truth"});
        const std::size_t n_models = std::max<std::size_t>(fits.size(), 1);
        for (std::size_t f = 0; f < n_models; ++f) {
            for (std::size_t p = 0; p < hold.size(); ++p) {
                std::vector<double> x, y0, y1;
                for (Index n : distinct) {
                    const auto k = static_cast<std::size_t>(std::find(n_list.begin(), n_list.end(), n) - n_list.begin());
                    const auto& r = rows[(k * n_models + f) * hold.size() + p];
                    x.push_back(static_cast<double>(n));
                    y0.push_back(r.mspe);
                    y1.push_back(r.mspe_truth);
                }
                s << rows[f * hold.size()].fit_label << static_cast<long long>(p) << loglog_slope(x, y0)
                  << loglog_slope(x, y1);
                s.end_row();
            }
        }
    });
}

}  // namespace matern::cli
