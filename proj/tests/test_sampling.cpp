#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "vg/distribution.hpp"
#include "vg/error.hpp"
#include "vg/sampling.hpp"

using namespace vg;

namespace {

struct Summary {
    double mean, var;
};

Summary summarise(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, ss / (n - 1.0)};
}

// Mean within 5 standard errors and variance within 5 standard errors of the
// sample variance (fourth moment taken from the law).
void expect_matches_law(const std::vector<double>& v, const VgParams& p) {
    const MomentSet m = moments_summary(p);
    const Summary s = summarise(v);
    const double n = static_cast<double>(v.size());
    EXPECT_NEAR(s.mean, m.mean, 5.0 * std::sqrt(m.variance / n));
    const double var_se = std::sqrt((m.central[4] - m.variance * m.variance) / n);
    EXPECT_NEAR(s.var, m.variance, 5.0 * var_se);
}

// Two-sided Kolmogorov statistic against the law.
double ks_statistic(std::vector<double> v, const VgParams& p) {
    std::sort(v.begin(), v.end());
    std::vector<double> f(v.size());
    cdf_sorted(p, v, f);
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        d = std::max({d, f[i] - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f[i]});
    return d;
}

}  // namespace

TEST(RngStream, DeterministicAndStreamSeparated) {
    RngStream a(42, 0), b(42, 0), c(42, 1);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const double u = a.uniform();
        EXPECT_EQ(u, b.uniform());
        EXPECT_GT(u, 0.0);
        EXPECT_LT(u, 1.0);
        differs |= (u != c.uniform());
    }
    EXPECT_TRUE(differs);
}

TEST(Gamma, MomentsAcrossShapes) {
    RngStream rng(7);
    for (double shape : {0.05, 0.4, 1.0, 2.5, 30.0}) {
        const double rate = 1.7;
        const auto v = sample_gamma(shape, rate, rng, 200000);
        const Summary s = summarise(v);
        const double n = static_cast<double>(v.size());
        EXPECT_NEAR(s.mean, shape / rate, 5.0 * std::sqrt(shape / n) / rate) << shape;
        EXPECT_NEAR(s.var, shape / (rate * rate), 6.0 * std::sqrt((6.0 * shape + 2 * shape * shape) / n) / (rate * rate))
            << shape;
        EXPECT_TRUE(std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; }));
    }
    EXPECT_THROW(sample_gamma(0.0, 1.0, rng), DomainError);
    EXPECT_THROW(sample_gamma(1.0, -1.0, rng), DomainError);
}

TEST(SampleVg, EveryMethodMatchesMoments) {
    const VgParams p{4.0, 0.7, 1.2, -0.3};
    for (SampleMethod m : {SampleMethod::NormalGamma, SampleMethod::GammaDifference, SampleMethod::NormalProducts,
                           SampleMethod::UniformLog}) {
        RngStream rng(11, static_cast<std::uint64_t>(m));
        const SampleBatch b = sample_vg(p, m, rng, 100000);
        EXPECT_EQ(b.values.size(), 100000u);
        EXPECT_EQ(b.method, m);
        expect_matches_law(b.values, p);
        // 1.63 / sqrt(n) is the 1% Kolmogorov critical value.
        EXPECT_LT(ks_statistic(b.values, p), 1.63 / std::sqrt(100000.0)) << method_name(m);
    }
}

TEST(SampleVg, SmallShapeNormalGamma) {
    const VgParams p{0.4, -0.5, 0.8, 1.0};
    RngStream rng(3);
    const SampleBatch b = sample_vg_normal_gamma(p, rng, 100000);
    expect_matches_law(b.values, p);
    EXPECT_LT(ks_statistic(b.values, p), 1.63 / std::sqrt(100000.0));
}

TEST(SampleVg, SameSeedSameDraws) {
    const VgParams p{3.0, 0.2, 1.0, 0.0};
    RngStream a(5), b(5);
    EXPECT_EQ(sample_vg_gamma_difference(p, a, 500).values, sample_vg_gamma_difference(p, b, 500).values);
}

TEST(SampleVg, IntegerRepresentationsCheckShape) {
    RngStream rng(1);
    EXPECT_THROW(sample_vg_integer_reps({2.5, 0.0, 1.0, 0.0}, rng, 10, SampleMethod::NormalProducts),
                 PreconditionError);
    EXPECT_THROW(sample_vg_integer_reps({3.0, 0.0, 1.0, 0.0}, rng, 10, SampleMethod::UniformLog), PreconditionError);
    EXPECT_NO_THROW(sample_vg_integer_reps({3.0, 0.0, 1.0, 0.0}, rng, 10, SampleMethod::NormalProducts));
}

TEST(SelfDecomposability, OutputKeepsTheLaw) {
    const VgParams p{4.0, 0.5, 1.0, 0.2};
    for (double c : {0.0, 0.3, 0.9}) {
        RngStream rng(17, static_cast<std::uint64_t>(c * 10));
        const SampleBatch b = selfdec_check_sample(p, c, rng, 100000);
        expect_matches_law(b.values, p);
        EXPECT_LT(ks_statistic(b.values, p), 1.63 / std::sqrt(100000.0)) << c;
    }
    RngStream rng(1);
    EXPECT_THROW(selfdec_check_sample({3.0, 0.0, 1.0, 0.0}, 0.5, rng, 10), PreconditionError);
    EXPECT_THROW(selfdec_check_sample(p, 1.5, rng, 10), PreconditionError);
}

namespace {

double two_sample_ks(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

}  // namespace

TEST(SampleVg, PairwiseTwoSampleAgreement) {
    const VgParams p{4.0, 0.7, 1.2, -0.5};
    const std::size_t n = 100000;
    std::vector<std::vector<double>> draws;
    for (SampleMethod m : {SampleMethod::NormalGamma, SampleMethod::GammaDifference, SampleMethod::NormalProducts,
                           SampleMethod::UniformLog}) {
        RngStream rng(99, static_cast<std::uint64_t>(m));
        draws.push_back(sample_vg(p, m, rng, n).values);
    }
    // 1% critical value of the two-sample statistic with equal sizes.
    const double crit = 1.628 * std::sqrt(2.0 / static_cast<double>(n));
    for (std::size_t a = 0; a < draws.size(); ++a)
        for (std::size_t b = a + 1; b < draws.size(); ++b) EXPECT_LT(two_sample_ks(draws[a], draws[b]), crit) << a << b;
}

TEST(SampleVg, EmpiricalCumulantsWithinFourStandardErrors) {
    const VgParams p{4.0, 0.7, 1.2, -0.5};
    RngStream rng(123);
    const auto v = sample_vg_gamma_difference(p, rng, 1000000).values;
    // Cumulant estimates per batch; the spread of batch estimates gives the standard error.
    constexpr std::size_t kBatches = 100;
    const std::size_t per = v.size() / kBatches;
    std::array<std::vector<double>, 4> est;
    for (std::size_t b = 0; b < kBatches; ++b) {
        const double* x = v.data() + b * per;
        double m = 0.0;
        for (std::size_t i = 0; i < per; ++i) m += x[i];
        m /= static_cast<double>(per);
        double c2 = 0.0, c3 = 0.0, c4 = 0.0;
        for (std::size_t i = 0; i < per; ++i) {
            const double d = x[i] - m;
            c2 += d * d;
            c3 += d * d * d;
            c4 += d * d * d * d;
        }
        c2 /= per;
        c3 /= per;
        c4 /= per;
        est[0].push_back(m);
        est[1].push_back(c2);
        est[2].push_back(c3);
        est[3].push_back(c4 - 3.0 * c2 * c2);
    }
    const auto kappa = cumulants(p, 4);
    for (int k = 0; k < 4; ++k) {
        const Summary s = summarise(est[k]);
        EXPECT_NEAR(s.mean, kappa[k + 1], 4.0 * std::sqrt(s.var / kBatches)) << "order " << k + 1;
    }
}
