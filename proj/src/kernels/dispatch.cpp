#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <string_view>

#include "vg/error.hpp"
#include "vg/kernels.hpp"
#include "kernel_table.hpp"

namespace vg::kernels {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(VG_HAVE_AVX2_KERNELS) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa initial_isa() noexcept {
    const char* env = std::getenv("VG_KERNELS");
    if (env != nullptr && std::string_view(env) == "scalar") return Isa::Scalar;
    return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() noexcept {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

const detail::KernelTable& table() noexcept {
#if defined(VG_HAVE_AVX2_KERNELS)
    if (current().load(std::memory_order_relaxed) == Isa::Avx2) return detail::avx2_table();
#endif
    return detail::scalar_table();
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw PreconditionError(std::string(what) + ": span sizes differ");
}

}  // namespace

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

bool isa_available(Isa isa) noexcept { return isa == Isa::Scalar || cpu_has_avx2(); }

void set_isa(Isa isa) {
    if (!isa_available(isa)) throw PreconditionError("set_isa: requested kernel variant is not available");
    current().store(isa, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) noexcept { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void log_bessel_k_batch(double nu, std::span<const double> x, std::span<double> log_k, std::span<double> ratio) {
    require_same_size(x.size(), log_k.size(), "log_bessel_k_batch");
    if (!ratio.empty()) require_same_size(x.size(), ratio.size(), "log_bessel_k_batch");
    if (!std::isfinite(nu)) throw DomainError("bessel_k: order must be finite");
    for (double v : x) {
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("bessel_k: argument must be positive and finite");
    }
    table().log_bessel_k(nu, x.data(), log_k.data(), ratio.empty() ? nullptr : ratio.data(), x.size());
}

void log_batch(std::span<const double> x, std::span<double> out) {
    require_same_size(x.size(), out.size(), "log_batch");
    table().log(x.data(), out.data(), x.size());
}

void normal_variance_mean(double mu, double theta, double sigma, std::span<const double> s,
                          std::span<const double> z, std::span<double> out) {
    require_same_size(s.size(), z.size(), "normal_variance_mean");
    require_same_size(s.size(), out.size(), "normal_variance_mean");
    table().normal_variance_mean(mu, theta, sigma, s.data(), z.data(), out.data(), s.size());
}

PowerSums power_sums(std::span<const double> x, double center) {
    return table().power_sums(x.data(), x.size(), center);
}

double sum(std::span<const double> x) { return table().sum(x.data(), x.size()); }

double dot(std::span<const double> a, std::span<const double> b) {
    require_same_size(a.size(), b.size(), "dot");
    return table().dot(a.data(), b.data(), a.size());
}

double weighted_sq_dev(std::span<const double> x, std::span<const double> w, double center) {
    require_same_size(x.size(), w.size(), "weighted_sq_dev");
    return table().weighted_sq_dev(x.data(), w.data(), x.size(), center);
}

}  // namespace vg::kernels
