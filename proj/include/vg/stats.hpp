#pragma once

// Goodness-of-fit and Monte Carlo summary helpers used by the property
// tests, the acceptance runner and the CLI.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "vg/params.hpp"

namespace vg::stats {

// sup |F_n - F| for a sample against a continuous cdf. `sorted` must be ascending.
double ks_statistic_sorted(std::span<const double> sorted, const std::function<double(double)>& cdf);
// Same against a VG law; the cdf is evaluated by accumulation over the sorted sample.
double ks_statistic(std::span<const double> sample, const VgParams& p);
// sup |F_n - G_m|.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

// Asymptotic 1% critical values: 1.6276 / sqrt(n) and 1.6276 sqrt((n+m)/(nm)).
double ks_critical_1pct(std::size_t n);
double ks_critical_1pct(std::size_t n, std::size_t m);

struct McEstimate {
    double mean;     // sample mean of the statistic
    double std_err;  // its standard error
};

// Mean of (x_i - center)^k with its standard error.
McEstimate mc_power_moment(std::span<const double> x, int k, double center = 0.0);

// Unbiased k-statistics k1..k4 (element 0 unused). Standard errors come
// from the spread of the same statistics over `batches` equal slices.
struct Cumulants4 {
    double k[5];
    double se[5];
};
Cumulants4 sample_cumulants(std::span<const double> x, std::size_t batches = 100);

}  // namespace vg::stats
