#pragma once

// CSV, config and manifest plumbing shared by the subcommands.

#include <Eigen/Dense>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "matern/error.hpp"
#include "matern/kernel.hpp"
#include "matern/linalg.hpp"

namespace matern::cli {

using nlohmann::json;
namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kRuntime = 1, kConfig = 2, kNoConvergence = 3 };

/// Non-convergence surfaced to the shell as exit 3.
class NoConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Formats with 17 significant digits.
std::string fmt(double v);

/// Header-first CSV writer. Files are written to `dir / name` and recorded
/// in the manifest's output list.
class CsvWriter {
public:
    CsvWriter(const fs::path& path, std::initializer_list<std::string> header);
    CsvWriter(const fs::path& path, const std::vector<std::string>& header);

    CsvWriter& operator<<(double v);
    CsvWriter& operator<<(long long v);
    CsvWriter& operator<<(int v) { return *this << static_cast<long long>(v); }
    CsvWriter& operator<<(long v) { return *this << static_cast<long long>(v); }
    CsvWriter& operator<<(const std::string& v);
    CsvWriter& operator<<(const char* v) { return *this << std::string(v); }
    CsvWriter& operator<<(bool v) { return *this << (v ? 1LL : 0LL); }
    void end_row();

private:
    void sep();
    std::ofstream out_;
    std::size_t columns_ = 0;
    std::size_t col_ = 0;
};

/// Spatial data read from CSV with columns x[,y[,z]],value.
struct DataFile {
    LocationSet locs;
    Eigen::VectorXd y;
};

/// Throws ConfigError on a missing, empty or malformed file.
DataFile read_data_csv(const fs::path& path);

/// Writes columns x[,y[,z]],value.
void write_data_csv(const fs::path& path, const LocationSet& locs, const Eigen::VectorXd& y);

/// Parsed JSON config; an absent path gives an empty object.
json load_config(const std::optional<std::string>& path);

/// Rejects keys outside `allowed` (ConfigError naming the key).
void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where);

/// Typed lookup with a default; wrong types are ConfigErrors.
template <class T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

/// {tau2, sigma2, nu, and one of phi or range}; defaults tau2=0.2,
/// sigma2=1, nu=0.5, range=0.4. Validated.
NoisyModelParams parse_params(const json& obj, const std::string& where);

/// Run manifest, flushed on every stage so a crash still leaves one behind.
class Manifest {
public:
    Manifest(fs::path dir, std::string command);

    void set_config(json config) { doc_["config"] = std::move(config); }
    void set(const std::string& key, json value) { doc_[key] = std::move(value); }
    fs::path output(const std::string& name);  // records and returns dir/name
    void stage(const std::string& name, double seconds);
    void finish(int exit_code, const std::string& error);

private:
    void flush();
    fs::path dir_;
    json doc_;
};

/// Wall-clock stopwatch in seconds.
class Stopwatch {
public:
    Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_;
};

}  // namespace matern::cli
