// Scalar reference kernels. These define the expected results; the AVX2
// variants are tested against them.

#include <cmath>

#include "../bessel_detail.hpp"
#include "kernel_table.hpp"

namespace vg::kernels::detail {

namespace {

void log_bessel_k(double nu, const double* x, double* log_k, double* ratio, std::size_t n) {
    const specfun::detail::BatchOrder order(nu);
    for (std::size_t i = 0; i < n; ++i) {
        const specfun::BesselKPair p = order.eval(x[i]);
        log_k[i] = p.log_k;
        if (ratio != nullptr) ratio[i] = p.ratio;
    }
}

void log_values(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::log(x[i]);
}

void normal_variance_mean(double mu, double theta, double sigma, const double* s, const double* z, double* out,
                          std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = mu + theta * s[i] + sigma * std::sqrt(s[i]) * z[i];
}

PowerSums power_sums(const double* x, std::size_t n, double center) {
    PowerSums p;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - center;
        const double d2 = d * d;
        p.s1 += d;
        p.s2 += d2;
        p.s3 += d2 * d;
        p.s4 += d2 * d2;
    }
    return p;
}

double sum(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double weighted_sq_dev(const double* x, const double* w, std::size_t n, double center) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - center;
        s += w[i] * d * d;
    }
    return s;
}

constexpr KernelTable kScalar{log_bessel_k, log_values, normal_variance_mean, power_sums, sum, dot, weighted_sq_dev};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace vg::kernels::detail
