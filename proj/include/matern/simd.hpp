#pragma once

// Data-parallel inner loops with a scalar reference implementation and an
// AVX2+FMA variant. The variant is picked once per process from CPUID and can
// be overridden (tests compare the two paths element by element).

#include <cstddef>
#include <span>
#include <string_view>

namespace matern::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// "scalar", "avx2" or "auto" (the detected ISA). Throws std::invalid_argument.
Isa parse_isa(std::string_view name);

/// Best instruction set supported by the running CPU (and compiled in).
Isa detected_isa();

/// Instruction set used by the free functions below. Starts at the detected
/// ISA unless the MATERN_ISA environment variable names another.
Isa active_isa();

/// Force an instruction set. Requests above `detected_isa()` fall back to
/// scalar. Returns the ISA actually selected.
Isa set_active_isa(Isa isa);

/// Restores the previous ISA on scope exit.
class ScopedIsa {
public:
    explicit ScopedIsa(Isa isa) : previous_(active_isa()) { set_active_isa(isa); }
    ~ScopedIsa() { set_active_isa(previous_); }
    ScopedIsa(const ScopedIsa&) = delete;
    ScopedIsa& operator=(const ScopedIsa&) = delete;

private:
    Isa previous_;
};

struct SpectralSums {
    double quad = 0.0;    // sum z_i^2 / (tau2 + sigma2 * lambda_i)
    double logdet = 0.0;  // sum log(tau2 + sigma2 * lambda_i)
};

/// Function table for one instruction set. Lengths are element counts.
struct KernelTable {
    // out[j] = || point - s_j || with coordinates stored axis-major
    // (axes[k][j] is coordinate k of point j), k < d.
    void (*distances)(const double* const* axes, int d, std::size_t n, const double* point,
                      double* out);
    // out[j] = exp(-scale * x[j]); x[j] * scale >= 0 expected.
    void (*exp_neg_scaled)(const double* x, double scale, std::size_t n, double* out);
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum a[j] * b[j] * c[j]
    double (*dot3)(const double* a, const double* b, const double* c, std::size_t n);
    SpectralSums (*spectral_sums)(const double* lambda, const double* z2, std::size_t n,
                                  double tau2, double sigma2);
};

const KernelTable& table(Isa isa);

// Convenience wrappers over the active table.
void distances(std::span<const double* const> axes, std::size_t n, const double* point,
               std::span<double> out);
void exp_neg_scaled(std::span<const double> x, double scale, std::span<double> out);
double dot(std::span<const double> a, std::span<const double> b);
double dot3(std::span<const double> a, std::span<const double> b, std::span<const double> c);
SpectralSums spectral_sums(std::span<const double> lambda, std::span<const double> z2,
                           double tau2, double sigma2);

namespace detail {
extern const KernelTable scalar_table;
#if defined(MATERN_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
}  // namespace detail

}  // namespace matern::simd
