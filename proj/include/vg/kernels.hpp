#pragma once

// Data-parallel inner loops used by the likelihood, E-step, sampling and
// moment code. Each kernel has a scalar reference implementation and an
// AVX2+FMA variant; the variant is picked once at runtime from the CPU
// feature flags. Setting VG_KERNELS=scalar in the environment pins the
// scalar path, and set_isa() does the same programmatically (tests use it
// to run both variants on identical inputs).

#include <span>

namespace vg::kernels {

enum class Isa { Scalar, Avx2 };

Isa active_isa() noexcept;
bool isa_available(Isa isa) noexcept;
// Throws PreconditionError when the requested variant is not available.
void set_isa(Isa isa);
const char* isa_name(Isa isa) noexcept;

// For every x_i > 0: log_k[i] = log K_nu(x_i) and, when `ratio` is non-empty,
// ratio[i] = K_{nu+1}(x_i) / K_nu(x_i). Throws DomainError on x_i <= 0.
void log_bessel_k_batch(double nu, std::span<const double> x, std::span<double> log_k,
                        std::span<double> ratio = {});

// out[i] = log(x[i]) for x[i] > 0 (normal numbers).
void log_batch(std::span<const double> x, std::span<double> out);

// out[i] = mu + theta * s[i] + sigma * sqrt(s[i]) * z[i]
void normal_variance_mean(double mu, double theta, double sigma, std::span<const double> s,
                          std::span<const double> z, std::span<double> out);

// Sums of (x_i - center)^k for k = 1..4.
struct PowerSums {
    double s1 = 0.0;
    double s2 = 0.0;
    double s3 = 0.0;
    double s4 = 0.0;
};
PowerSums power_sums(std::span<const double> x, double center);

double sum(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
// sum_i w_i (x_i - center)^2
double weighted_sq_dev(std::span<const double> x, std::span<const double> w, double center);

}  // namespace vg::kernels
