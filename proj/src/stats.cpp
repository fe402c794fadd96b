#include "vg/stats.hpp"

#include <algorithm>
#include <cmath>

#include "vg/distribution.hpp"
#include "vg/error.hpp"

namespace vg::stats {

namespace {

constexpr double kKs1pct = 1.6276;

double ks_from_cdf_values(std::span<const double> f) {
    const double n = static_cast<double>(f.size());
    double d = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max({d, f[i] - lo, hi - f[i]});
    }
    return d;
}

// k-statistics from power sums about the sample mean.
void kstats(std::span<const double> x, double out[5]) {
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double s2 = 0.0, s3 = 0.0, s4 = 0.0;
    for (double v : x) {
        const double d = v - mean;
        const double d2 = d * d;
        s2 += d2;
        s3 += d2 * d;
        s4 += d2 * d2;
    }
    const double m2 = s2 / n, m3 = s3 / n, m4 = s4 / n;
    out[0] = 0.0;
    out[1] = mean;
    out[2] = n / (n - 1.0) * m2;
    out[3] = n * n / ((n - 1.0) * (n - 2.0)) * m3;
    out[4] = n * n * ((n + 1.0) * m4 - 3.0 * (n - 1.0) * m2 * m2) / ((n - 1.0) * (n - 2.0) * (n - 3.0));
}

}  // namespace

double ks_statistic_sorted(std::span<const double> sorted, const std::function<double(double)>& cdf) {
    if (sorted.empty()) throw PreconditionError("ks_statistic: empty sample");
    std::vector<double> f(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) f[i] = cdf(sorted[i]);
    return ks_from_cdf_values(f);
}

double ks_statistic(std::span<const double> sample, const VgParams& p) {
    if (sample.empty()) throw PreconditionError("ks_statistic: empty sample");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> f(sorted.size());
    cdf_sorted(p, sorted, f);
    return ks_from_cdf_values(f);
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw PreconditionError("ks_two_sample: empty sample");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double n = static_cast<double>(x.size());
    const double m = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    return d;
}

double ks_critical_1pct(std::size_t n) { return kKs1pct / std::sqrt(static_cast<double>(n)); }

double ks_critical_1pct(std::size_t n, std::size_t m) {
    const double a = static_cast<double>(n);
    const double b = static_cast<double>(m);
    return kKs1pct * std::sqrt((a + b) / (a * b));
}

McEstimate mc_power_moment(std::span<const double> x, int k, double center) {
    if (x.size() < 2) throw PreconditionError("mc_power_moment: need at least 2 values");
    const double n = static_cast<double>(x.size());
    double s = 0.0, s2 = 0.0;
    for (double v : x) {
        const double t = std::pow(v - center, k);
        s += t;
        s2 += t * t;
    }
    const double mean = s / n;
    const double var = std::max(s2 / n - mean * mean, 0.0);
    return {mean, std::sqrt(var / (n - 1.0))};
}

Cumulants4 sample_cumulants(std::span<const double> x, std::size_t batches) {
    if (batches < 2 || x.size() < 8 * batches) throw PreconditionError("sample_cumulants: too few values per batch");
    Cumulants4 out{};
    kstats(x, out.k);
    // Spread of per-batch k-statistics gives the standard error of the full estimate.
    const std::size_t per = x.size() / batches;
    double sum[5] = {0, 0, 0, 0, 0}, sum2[5] = {0, 0, 0, 0, 0};
    for (std::size_t b = 0; b < batches; ++b) {
        double kb[5];
        kstats(x.subspan(b * per, per), kb);
        for (int j = 1; j <= 4; ++j) {
            sum[j] += kb[j];
            sum2[j] += kb[j] * kb[j];
        }
    }
    const double nb = static_cast<double>(batches);
    out.se[0] = 0.0;
    for (int j = 1; j <= 4; ++j) {
        const double m = sum[j] / nb;
        const double var_batch = std::max(sum2[j] / nb - m * m, 0.0) * nb / (nb - 1.0);
        out.se[j] = std::sqrt(var_batch / nb);
    }
    return out;
}

}  // namespace vg::stats
