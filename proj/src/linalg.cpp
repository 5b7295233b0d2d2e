#include "matern/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "matern/error.hpp"
#include "matern/simd.hpp"

namespace matern {
namespace {

constexpr Index kBlock = 96;

std::vector<const double*> axis_pointers(const Eigen::MatrixXd& coords) {
    std::vector<const double*> axes(static_cast<std::size_t>(coords.cols()));
    for (Index k = 0; k < coords.cols(); ++k) axes[static_cast<std::size_t>(k)] = coords.col(k).data();
    return axes;
}

double compute_min_separation(const Eigen::MatrixXd& coords) {
    const Index n = coords.rows();
    if (n < 2) return std::numeric_limits<double>::infinity();
    const auto axes = axis_pointers(coords);
    std::vector<const double*> tail(axes.size());
    std::vector<double> buf(static_cast<std::size_t>(n));
    double best = std::numeric_limits<double>::infinity();
    std::array<double, 3> p{};
    for (Index i = 0; i + 1 < n; ++i) {
        for (Index k = 0; k < coords.cols(); ++k) p[static_cast<std::size_t>(k)] = coords(i, k);
        for (std::size_t k = 0; k < axes.size(); ++k) tail[k] = axes[k] + i + 1;
        const auto m = static_cast<std::size_t>(n - i - 1);
        simd::distances(tail, m, p.data(), std::span<double>(buf.data(), m));
        best = std::min(best, *std::min_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(m)));
    }
    return best;
}

// Unblocked lower Cholesky of the diagonal block a(k:k+kb, k:k+kb).
void factor_diagonal_block(Eigen::Ref<Eigen::MatrixXd> a, Index offset) {
    const Index kb = a.rows();
    for (Index j = 0; j < kb; ++j) {
        double d = a(j, j);
        for (Index p = 0; p < j; ++p) d -= a(j, p) * a(j, p);
        if (!(d > 0.0) || !std::isfinite(d)) {
            const auto pivot = static_cast<std::size_t>(offset + j);
            throw NotPositiveDefinite(pivot, "cholesky: non-positive pivot at index " +
                                                 std::to_string(pivot) + " (value " +
                                                 std::to_string(d) + ")");
        }
        const double ljj = std::sqrt(d);
        a(j, j) = ljj;
        for (Index i = j + 1; i < kb; ++i) {
            double s = a(i, j);
            for (Index p = 0; p < j; ++p) s -= a(i, p) * a(j, p);
            a(i, j) = s / ljj;
        }
    }
}

}  // namespace

LocationSet::LocationSet(int d, Eigen::MatrixXd coords) : d_(d), coords_(std::move(coords)) {
    if (d < 1 || d > 3) throw DomainError("LocationSet: dimension must be 1, 2 or 3");
    if (coords_.cols() != d) throw DomainError("LocationSet: coordinate matrix must be n x d");
    for (Index i = 0; i < coords_.rows(); ++i) {
        for (Index k = 0; k < d; ++k) {
            const double v = coords_(i, k);
            if (!(v >= 0.0 && v <= 1.0)) {
                throw DomainError("LocationSet: coordinate outside [0,1] at row " + std::to_string(i));
            }
        }
    }
    min_sep_ = compute_min_separation(coords_);
    if (!(min_sep_ > 0.0)) throw DomainError("LocationSet: coincident points");
}

LocationSet::LocationSet(int d, Eigen::MatrixXd coords, double min_sep, Trusted)
    : d_(d), coords_(std::move(coords)), min_sep_(min_sep) {}

std::array<double, 3> LocationSet::point(Index i) const {
    std::array<double, 3> p{0.0, 0.0, 0.0};
    for (Index k = 0; k < d_; ++k) p[static_cast<std::size_t>(k)] = coords_(i, k);
    return p;
}

LocationSet LocationSet::prefix(Index n) const {
    if (n < 0 || n > size()) throw DomainError("LocationSet::prefix: size out of range");
    Eigen::MatrixXd c = coords_.topRows(n);
    // A subset can only widen the minimum separation; recompute for exactness.
    const double sep = compute_min_separation(c);
    return LocationSet(d_, std::move(c), sep, Trusted{});
}

LocationSet LocationSet::subset(std::span<const Index> rows) const {
    Eigen::MatrixXd c(static_cast<Index>(rows.size()), d_);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] < 0 || rows[r] >= size()) throw DomainError("LocationSet::subset: bad row");
        c.row(static_cast<Index>(r)) = coords_.row(rows[r]);
    }
    return LocationSet(d_, std::move(c));
}

void LocationSet::distances_to(const std::array<double, 3>& p, std::span<double> out) const {
    const auto axes = axis_pointers(coords_);
    simd::distances(axes, static_cast<std::size_t>(size()), p.data(), out);
}

Eigen::VectorXd EigenDecomposition::rotate(const Eigen::VectorXd& v) const {
    if (v.size() != vectors.rows()) throw DomainError("rotate: dimension mismatch");
    return vectors.transpose() * v;
}

Eigen::MatrixXd distance_matrix(const LocationSet& locs) {
    const Index n = locs.size();
    Eigen::MatrixXd dist(n, n);
    for (Index j = 0; j < n; ++j) {
        locs.distances_to(locs.point(j), std::span<double>(dist.col(j).data(), static_cast<std::size_t>(n)));
        dist(j, j) = 0.0;
    }
    return dist;
}

Eigen::MatrixXd correlation_matrix(double phi, double nu, const Eigen::MatrixXd& distances) {
    const Index n = distances.rows();
    Eigen::MatrixXd rho(n, distances.cols());
    if (nu == 0.5) {
        for (Index j = 0; j < distances.cols(); ++j) {
            matern_correlation_batch(
                phi, nu, std::span<const double>(distances.col(j).data(), static_cast<std::size_t>(n)),
                std::span<double>(rho.col(j).data(), static_cast<std::size_t>(n)));
        }
        return rho;
    }
    // Bessel evaluations dominate: fill the lower triangle and mirror.
    for (Index j = 0; j < n; ++j) {
        const auto len = static_cast<std::size_t>(n - j);
        matern_correlation_batch(phi, nu, std::span<const double>(distances.col(j).data() + j, len),
                                 std::span<double>(rho.col(j).data() + j, len));
    }
    rho.triangularView<Eigen::StrictlyUpper>() = rho.transpose();
    return rho;
}

Eigen::MatrixXd correlation_dphi_matrix(double phi, double nu, const Eigen::MatrixXd& distances) {
    const Index n = distances.rows();
    Eigen::MatrixXd out(n, n);
    for (Index j = 0; j < n; ++j) {
        const auto len = static_cast<std::size_t>(n - j);
        matern_correlation_dphi_batch(phi, nu, std::span<const double>(distances.col(j).data() + j, len),
                                      std::span<double>(out.col(j).data() + j, len));
    }
    out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
    return out;
}

Eigen::MatrixXd build_cov_matrix(const NoisyModelParams& params, const LocationSet& locs) {
    params.validate();
    Eigen::MatrixXd v = correlation_matrix(params.matern.phi, params.matern.nu, distance_matrix(locs));
    v *= params.matern.sigma2;
    v.diagonal().array() += params.tau2;
    return v;
}

Eigen::VectorXd cross_cov(const MaternParams& params, const LocationSet& locs,
                          const std::array<double, 3>& s0) {
    const auto n = static_cast<std::size_t>(locs.size());
    Eigen::VectorXd dist(locs.size());
    locs.distances_to(s0, std::span<double>(dist.data(), n));
    Eigen::VectorXd out(locs.size());
    matern_correlation_batch(params.phi, params.nu, std::span<const double>(dist.data(), n),
                             std::span<double>(out.data(), n));
    out *= params.sigma2;
    return out;
}

CovFactor cholesky(const Eigen::MatrixXd& matrix) {
    if (matrix.rows() != matrix.cols()) throw DomainError("cholesky: matrix must be square");
    const Index n = matrix.rows();
    CovFactor f;
    f.lower = matrix;
    Eigen::MatrixXd& a = f.lower;
    for (Index k = 0; k < n; k += kBlock) {
        const Index kb = std::min(kBlock, n - k);
        const Index rest = n - k - kb;
        factor_diagonal_block(a.block(k, k, kb, kb), k);
        if (rest > 0) {
            auto l11 = a.block(k, k, kb, kb).triangularView<Eigen::Lower>();
            auto a21 = a.block(k + kb, k, rest, kb);
            l11.transpose().solveInPlace<Eigen::OnTheRight>(a21);
            a.block(k + kb, k + kb, rest, rest).selfadjointView<Eigen::Lower>().rankUpdate(a21, -1.0);
        }
    }
    a.triangularView<Eigen::StrictlyUpper>().setZero();
    f.logdet = 2.0 * a.diagonal().array().log().sum();
    return f;
}

CovFactor cholesky_with_jitter(const Eigen::MatrixXd& matrix, double scale) {
    try {
        return cholesky(matrix);
    } catch (const NotPositiveDefinite&) {
    }
    for (double boost = 1e-10; ; boost *= 10.0) {
        Eigen::MatrixXd m = matrix;
        m.diagonal().array() += boost * scale;
        try {
            CovFactor f = cholesky(m);
            f.jitter = boost * scale;
            return f;
        } catch (const NotPositiveDefinite&) {
            if (boost >= 1e-6 * (1.0 - 1e-9)) throw;
        }
    }
}

Eigen::VectorXd solve_with_factor(const CovFactor& factor, const Eigen::VectorXd& rhs) {
    if (rhs.size() != factor.size()) throw DomainError("solve_with_factor: dimension mismatch");
    Eigen::VectorXd x = rhs;
    factor.lower.triangularView<Eigen::Lower>().solveInPlace(x);
    factor.lower.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
    return x;
}

Eigen::MatrixXd solve_with_factor(const CovFactor& factor, const Eigen::MatrixXd& rhs) {
    if (rhs.rows() != factor.size()) throw DomainError("solve_with_factor: dimension mismatch");
    Eigen::MatrixXd x = rhs;
    factor.lower.triangularView<Eigen::Lower>().solveInPlace(x);
    factor.lower.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
    return x;
}

Eigen::MatrixXd inverse_from_factor(const CovFactor& factor) {
    const Index n = factor.size();
    // L^{-1} by column blocks; block j only touches rows >= j.
    Eigen::MatrixXd linv = Eigen::MatrixXd::Zero(n, n);
    for (Index j = 0; j < n; j += kBlock) {
        const Index jb = std::min(kBlock, n - j);
        auto x = linv.block(j, j, n - j, jb);
        x.topRows(jb).setIdentity();
        factor.lower.bottomRightCorner(n - j, n - j).triangularView<Eigen::Lower>().solveInPlace(x);
    }
    Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(n, n);
    inv.selfadjointView<Eigen::Lower>().rankUpdate(linv.transpose());
    inv.triangularView<Eigen::StrictlyUpper>() = inv.transpose();
    return inv;
}

EigenSpectrum eigen_sym(const Eigen::MatrixXd& matrix) {
    if (matrix.rows() != matrix.cols()) throw DomainError("eigen_sym: matrix must be square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericError("eigen_sym: QR iteration did not converge");
    EigenSpectrum s;
    s.values = solver.eigenvalues().reverse();
    return s;
}

EigenDecomposition eigen_sym_full(const Eigen::MatrixXd& matrix) {
    if (matrix.rows() != matrix.cols()) throw DomainError("eigen_sym_full: matrix must be square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw NumericError("eigen_sym_full: QR iteration did not converge");
    EigenDecomposition e;
    e.spectrum.values = solver.eigenvalues().reverse();
    e.vectors = solver.eigenvectors().rowwise().reverse();
    return e;
}

}  // namespace matern
