#include "matern/simd.hpp"

#include <atomic>
#include <cassert>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace matern::simd {
namespace {

Isa probe() {
#if defined(MATERN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::avx2;
#endif
    return Isa::scalar;
}

Isa initial_isa() {
    const char* env = std::getenv("MATERN_ISA");
    if (env == nullptr || *env == '\0') return detected_isa();
    const Isa want = parse_isa(env);
    return want == Isa::avx2 && detected_isa() != Isa::avx2 ? Isa::scalar : want;
}

std::atomic<Isa>& active() {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

Isa parse_isa(std::string_view name) {
    if (name == "scalar") return Isa::scalar;
    if (name == "avx2") return Isa::avx2;
    if (name == "auto") return detected_isa();
    throw std::invalid_argument("unknown instruction set '" + std::string(name) + "'");
}

Isa detected_isa() {
    static const Isa isa = probe();
    return isa;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

Isa set_active_isa(Isa isa) {
    if (isa == Isa::avx2 && detected_isa() != Isa::avx2) isa = Isa::scalar;
    active().store(isa, std::memory_order_relaxed);
    return isa;
}

const KernelTable& table(Isa isa) {
#if defined(MATERN_HAVE_AVX2)
    if (isa == Isa::avx2 && detected_isa() == Isa::avx2) return detail::avx2_table;
#endif
    (void)isa;
    return detail::scalar_table;
}

void distances(std::span<const double* const> axes, std::size_t n, const double* point,
               std::span<double> out) {
    assert(out.size() >= n);
    table(active_isa()).distances(axes.data(), static_cast<int>(axes.size()), n, point,
                                  out.data());
}

void exp_neg_scaled(std::span<const double> x, double scale, std::span<double> out) {
    assert(out.size() >= x.size());
    table(active_isa()).exp_neg_scaled(x.data(), scale, x.size(), out.data());
}

double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    return table(active_isa()).dot(a.data(), b.data(), a.size());
}

double dot3(std::span<const double> a, std::span<const double> b, std::span<const double> c) {
    assert(a.size() == b.size() && a.size() == c.size());
    return table(active_isa()).dot3(a.data(), b.data(), c.data(), a.size());
}

SpectralSums spectral_sums(std::span<const double> lambda, std::span<const double> z2,
                           double tau2, double sigma2) {
    assert(lambda.size() == z2.size());
    return table(active_isa()).spectral_sums(lambda.data(), z2.data(), lambda.size(), tau2,
                                             sigma2);
}

}  // namespace matern::simd
