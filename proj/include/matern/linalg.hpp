#pragma once

// Dense symmetric positive-definite linear algebra for kernel matrices.

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "matern/kernel.hpp"

namespace matern {

using Index = Eigen::Index;

/// n sampled points in [0,1]^d (d in {1,2,3}) with pairwise-distinct coordinates.
/// Coordinates are stored axis-major: coords().col(k) holds axis k.
class LocationSet {
public:
    LocationSet() = default;
    /// `coords` is n x d. Throws DomainError on out-of-range coordinates,
    /// d outside {1,2,3}, or coincident points.
    LocationSet(int d, Eigen::MatrixXd coords);

    int dim() const { return d_; }
    Index size() const { return coords_.rows(); }
    const Eigen::MatrixXd& coords() const { return coords_; }
    std::array<double, 3> point(Index i) const;
    double min_separation() const { return min_sep_; }

    /// First n points (nested designs are prefixes of one ordering).
    LocationSet prefix(Index n) const;
    LocationSet subset(std::span<const Index> rows) const;

    /// out[j] = || p - s_j ||.
    void distances_to(const std::array<double, 3>& p, std::span<double> out) const;

private:
    struct Trusted {};
    LocationSet(int d, Eigen::MatrixXd coords, double min_sep, Trusted);

    int d_ = 1;
    Eigen::MatrixXd coords_;
    double min_sep_ = 0.0;
};

/// Cholesky factor L (lower, strict upper part zero) and log det = 2 sum log L_ii.
struct CovFactor {
    Eigen::MatrixXd lower;
    double logdet = 0.0;
    double jitter = 0.0;  // diagonal boost applied by the jitter policy, 0 if none

    Index size() const { return lower.rows(); }
};

/// Eigenvalues sorted in decreasing order.
struct EigenSpectrum {
    Eigen::VectorXd values;

    Index size() const { return values.size(); }
};

/// Spectrum plus orthonormal eigenvectors (column i pairs with values[i]).
struct EigenDecomposition {
    EigenSpectrum spectrum;
    Eigen::MatrixXd vectors;

    /// Q^T v.
    Eigen::VectorXd rotate(const Eigen::VectorXd& v) const;
};

/// Full symmetric matrix of pairwise distances.
Eigen::MatrixXd distance_matrix(const LocationSet& locs);

/// Unit-sill Matern correlation matrix rho(phi) from a distance matrix.
Eigen::MatrixXd correlation_matrix(double phi, double nu, const Eigen::MatrixXd& distances);

/// Elementwise d rho / d phi.
Eigen::MatrixXd correlation_dphi_matrix(double phi, double nu, const Eigen::MatrixXd& distances);

/// V = sigma2 rho(phi) + tau2 I; the nugget sits on the diagonal (site identity).
Eigen::MatrixXd build_cov_matrix(const NoisyModelParams& params, const LocationSet& locs);

/// Cross-covariance K_w(s0 - s_i) between one point and the sites (no nugget).
Eigen::VectorXd cross_cov(const MaternParams& params, const LocationSet& locs,
                          const std::array<double, 3>& s0);

/// Blocked Cholesky. Throws NotPositiveDefinite carrying the failing pivot.
CovFactor cholesky(const Eigen::MatrixXd& matrix);

/// Cholesky with the jitter policy: on failure add 1e-10 * scale to the
/// diagonal, escalating by 10x up to 1e-6 * scale, then rethrow.
CovFactor cholesky_with_jitter(const Eigen::MatrixXd& matrix, double scale);

Eigen::VectorXd solve_with_factor(const CovFactor& factor, const Eigen::VectorXd& rhs);
Eigen::MatrixXd solve_with_factor(const CovFactor& factor, const Eigen::MatrixXd& rhs);

/// V^{-1} from its factor.
Eigen::MatrixXd inverse_from_factor(const CovFactor& factor);

/// Eigenvalues only (Householder tridiagonalization + implicit QR).
EigenSpectrum eigen_sym(const Eigen::MatrixXd& matrix);

/// Eigenvalues and eigenvectors.
EigenDecomposition eigen_sym_full(const Eigen::MatrixXd& matrix);

}  // namespace matern
