#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace matern::cli {

struct CommonFlags {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string out_dir = "out";
    std::optional<std::string> isa;
};

struct ModelFlags {
    std::optional<std::string> mode;
    std::optional<double> phi_fixed;
    std::optional<double> nu;
    std::optional<std::string> data;  // fit only
};

// Each returns the process exit code and leaves a manifest in out_dir.
int cmd_simulate(const CommonFlags& common, const ModelFlags& model);
int cmd_fit(const CommonFlags& common, const ModelFlags& model);
int cmd_eigscan(const CommonFlags& common, const ModelFlags& model);
int cmd_likmap(const CommonFlags& common, const ModelFlags& model);
int cmd_krig(const CommonFlags& common, const ModelFlags& model);

}  // namespace matern::cli
