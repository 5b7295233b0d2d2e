#include <iostream>

#include "CLI11.hpp"
#include "cli_io.hpp"
#include "commands.hpp"

using namespace matern::cli;

namespace {

void add_common(CLI::App* app, CommonFlags& c) {
    app->add_option("--config", c.config, "JSON config file");
    app->add_option("--seed", c.seed, "Master seed (overrides the config)");
    app->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
    app->add_option("--out-dir", c.out_dir, "Output directory")->capture_default_str();
    app->add_option("--isa", c.isa, "Kernel instruction set: auto, scalar or avx2");
}

void add_model(CLI::App* app, ModelFlags& m, bool with_mode) {
    app->add_option("--nu", m.nu, "Matern smoothness");
    if (with_mode) {
        app->add_option("--mode", m.mode, "profile, fixed-phi or no-nugget");
        app->add_option("--phi-fixed", m.phi_fixed, "Decay for fixed-phi fits");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Matern covariance estimation, kriging and simulation experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", MATERN_VERSION);

    CommonFlags common;
    ModelFlags model;
    auto* sim = app.add_subcommand("simulate", "Replicated simulate-and-fit study");
    auto* fit = app.add_subcommand("fit", "Fit a Matern model to x[,y[,z]],value data");
    auto* eig = app.add_subcommand("eigscan", "Eigenvalue decay scan on regular grids");
    auto* lik = app.add_subcommand("likmap", "Log-likelihood surfaces on one realization");
    auto* krg = app.add_subcommand("krig", "Kriging MSPE sweep over nested designs");
    for (auto* s : {sim, fit, eig, lik, krg}) add_common(s, common);
    add_model(sim, model, true);
    add_model(fit, model, true);
    add_model(eig, model, false);
    add_model(lik, model, false);
    add_model(krg, model, false);
    fit->add_option("data,--data", model.data, "Data CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }
    if (sim->parsed()) return cmd_simulate(common, model);
    if (fit->parsed()) return cmd_fit(common, model);
    if (eig->parsed()) return cmd_eigscan(common, model);
    if (lik->parsed()) return cmd_likmap(common, model);
    return cmd_krig(common, model);
}
