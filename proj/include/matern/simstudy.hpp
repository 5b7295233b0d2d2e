#pragma once

// Sampling designs, the Gaussian data-generating process, the replication
// engine with its summaries, likelihood surfaces and MSPE sweeps.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "matern/estimation.hpp"
#include "matern/kernel.hpp"
#include "matern/linalg.hpp"

namespace matern {

// ---------------------------------------------------------------- seeding

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed for one unit of work, mixed from the master seed and a key path
/// (setting index, replicate index, ...).
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys);

using Rng = std::mt19937_64;

/// Key paths under the master seed: the shared design is
/// derive_seed(seed, {kDesignSeedKey}); replicate r of setting s draws from
/// derive_seed(seed, {kDataSeedKey, s, r}).
inline constexpr std::uint64_t kDesignSeedKey = 0xde51;
inline constexpr std::uint64_t kDataSeedKey = 0xda7a;

// ---------------------------------------------------------------- designs

enum class DesignKind { perturbed_grid_2d, regular_grid, uniform_random };

std::string_view design_kind_name(DesignKind kind);
DesignKind parse_design_kind(std::string_view name);

struct DesignSpec {
    DesignKind kind = DesignKind::perturbed_grid_2d;
    int d = 2;
    Index n = 0;
    std::uint64_t seed = 0;
};

/// Side of the perturbed base grid and its spacing.
inline constexpr int kPerturbedGridSide = 67;
inline constexpr double kPerturbedGridStep = 0.015;
inline constexpr double kPerturbedGridOrigin = 0.005;
inline constexpr double kPerturbedGridJitter = 0.005;
inline constexpr double kPerturbedGridMinSeparation = 0.005;

/// Build a design. perturbed_grid_2d and uniform_random take the first n
/// points of a seeded ordering, so designs with the same seed are nested.
/// regular_grid is {0, 1/m, ..., (m-1)/m}^d with n = m^d.
LocationSet make_design(const DesignSpec& spec);

// ---------------------------------------------------------------- sampling

/// Draws from N(0, sigma2 rho(phi) + tau2 I) on one design. The latent
/// factor is computed once; each draw is y = L z1 + tau z2.
class GaussianSampler {
public:
    GaussianSampler(const NoisyModelParams& params, const LocationSet& locs);

    /// Latent w and observed y from one seeded stream (z1 first, then z2).
    void draw(std::uint64_t seed, Eigen::VectorXd& w, Eigen::VectorXd& y) const;
    Eigen::VectorXd draw(std::uint64_t seed) const;

    const CovFactor& factor() const { return factor_; }
    const NoisyModelParams& params() const { return params_; }

private:
    NoisyModelParams params_;
    CovFactor factor_;
};

/// One draw of y at `locs`.
Eigen::VectorXd sample_gp(const NoisyModelParams& params, const LocationSet& locs, std::uint64_t seed);

// ---------------------------------------------------------------- summaries

/// Type-7 percentile (linear interpolation of order statistics), q in [0,1].
double percentile(std::vector<double> values, double q);

struct ReplicationSummary {
    std::string setting;
    std::string estimator;  // e.g. tau2, sigma2, phi, kappa
    Index n = 0;
    double truth = 0.0;
    double p5 = 0.0, p25 = 0.0, p50 = 0.0, p75 = 0.0, p95 = 0.0;
    double bias = 0.0;
    double sd = 0.0;  // NaN when fewer than two values
    int n_replicates = 0;
    int n_failed = 0;
    bool valid = true;  // false when more than 10% of fits failed
};

ReplicationSummary summarize(const std::vector<double>& values, double truth, int n_failed);

// ---------------------------------------------------------------- replications

struct SimSetting {
    double tau2 = 0.2;
    double sigma2 = 1.0;
    double range = 0.4;  // effective range; phi from phi_from_effective_range
    double nu = 0.5;

    NoisyModelParams params() const;
    std::string id() const;
};

struct ReplicateRecord {
    int setting = 0;
    Index n = 0;
    int replicate = 0;
    bool ok = false;
    FitResult fit;
    std::string error;
};

struct ReplicationConfig {
    std::vector<SimSetting> settings;
    std::vector<Index> n_list{400, 900, 1600};
    int n_reps = 200;
    FitMode estimator = FitMode::profile;
    std::uint64_t seed = 1;
    int threads = 1;
    DesignKind design = DesignKind::perturbed_grid_2d;
    int d = 2;
    FitOptions fit_options;
    /// Called after each finished replicate (from worker threads, serialized).
    std::function<void(const ReplicateRecord&)> progress;
};

struct ReplicationOutput {
    std::vector<ReplicateRecord> records;  // ordered by (setting, n, replicate)
    std::vector<ReplicationSummary> summaries;
};

/// Each setting has one design of max(n_list) points; smaller n are its
/// prefixes. Replicate r of a setting draws one realization on the full
/// design (seed derived from (seed, setting, r)) and fits every n on the
/// matching prefix of it.
ReplicationOutput run_replications(const ReplicationConfig& config);

/// Summaries for tau2, sigma2, phi, kappa per (setting, n).
std::vector<ReplicationSummary> summarize_records(const std::vector<ReplicateRecord>& records,
                                                  const std::vector<SimSetting>& settings,
                                                  const std::vector<Index>& n_list);

// ---------------------------------------------------------------- surfaces

enum class SurfaceFixed { sigma2, kappa, tau2 };

std::string_view surface_fixed_name(SurfaceFixed f);
SurfaceFixed parse_surface_fixed(std::string_view name);

struct SurfaceSpec {
    SurfaceFixed fixed = SurfaceFixed::kappa;
    std::vector<double> phi;  // first axis always phi
    /// Second axis: tau2 when sigma2 or kappa is fixed, sigma2 when tau2 is fixed.
    std::vector<double> second;
    NoisyModelParams truth;  // supplies the fixed value and nu
};

struct SurfaceGrid {
    std::string axis1 = "phi";
    std::string axis2;
    std::vector<double> axis1_values;
    std::vector<double> axis2_values;
    Eigen::MatrixXd loglik;           // -l/2, rows = axis1, cols = axis2
    Eigen::MatrixXd sigma2;           // sigma2 used at each cell
    Eigen::MatrixXd tau2;             // tau2 used at each cell
    Eigen::Matrix<bool, -1, -1> pd;   // false where V was not PD
    std::string fixed;
};

/// -l/2 over the grid. One eigendecomposition of rho(phi) per phi value.
SurfaceGrid likelihood_surface(const LocationSet& locs, const Eigen::VectorXd& y, const SurfaceSpec& spec,
                               int threads = 1);

/// Evenly spaced values lo, ..., hi (count >= 1; count == 1 gives lo).
std::vector<double> linspace(double lo, double hi, int count);

// ---------------------------------------------------------------- MSPE sweep

struct MspeRow {
    Index n = 0;
    int point = 0;
    std::array<double, 3> s0{};
    std::string fit_label;
    double mspe = 0.0;          // realized MSPE of the fit's predictor under truth
    double mspe_truth = 0.0;    // MSPE of the true-parameter predictor
    double mspe_asserted = 0.0; // MSPE the fitted model asserts for itself
};

struct LabeledParams {
    std::string label;
    NoisyModelParams params;
};

/// MSPE of the latent-field predictor at each hold-out point for each
/// prefix size in n_list of `design`. `fits` may be empty (truth only).
std::vector<MspeRow> mspe_sweep(const NoisyModelParams& truth, const LocationSet& design,
                                const std::vector<Index>& n_list,
                                const std::vector<std::array<double, 3>>& holdout,
                                const std::vector<LabeledParams>& fits, int threads = 1);

}  // namespace matern
