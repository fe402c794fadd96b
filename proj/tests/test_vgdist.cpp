#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "vg/distribution.hpp"
#include "vg/error.hpp"
#include "vg/params.hpp"

using namespace vg;

namespace {

constexpr double pi = std::numbers::pi;

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

const std::vector<VgParams> kGrid = {
    {3.0, 0.5, 1.0, 0.0}, {1.7, -0.4, 0.9, 0.3}, {0.6, 0.2, 1.3, -1.0}, {4.0, 1.0, 1.0, 0.0},
    {2.0, -0.7, 0.5, 2.0}, {8.5, 0.0, 2.0, 0.0}, {1.0, 0.0, 1.0, 0.0},
};

}  // namespace

// ---- parameters -------------------------------------------------------------

TEST(Params, ValidationRejectsBadInput) {
    EXPECT_THROW(make_params(0.0, 0.0, 1.0, 0.0), DomainError);
    EXPECT_THROW(make_params(1.0, 0.0, -1.0, 0.0), DomainError);
    EXPECT_THROW(make_params(1.0, std::nan(""), 1.0, 0.0), DomainError);
    EXPECT_NO_THROW(make_params(0.01, -3.0, 0.2, 5.0));
}

TEST(Params, TailRatesAreRootsOfTheMgfPole) {
    for (const auto& p : kGrid) {
        // sigma^2 t^2 + 2 theta t - 1 vanishes at lambda_minus and -lambda_plus.
        for (double t : {p.lambda_minus(), -p.lambda_plus()})
            EXPECT_NEAR(p.sigma * p.sigma * t * t + 2.0 * p.theta * t - 1.0, 0.0, 1e-12);
        EXPECT_NEAR(p.scale_pos() * p.lambda_minus(), 1.0, 1e-14);
        EXPECT_NEAR(p.scale_neg() * p.lambda_plus(), 1.0, 1e-14);
    }
}

TEST(Params, AlternativeParametrisationsRoundTrip) {
    for (const auto& p : kGrid) {
        const VgParams a = convert_params(to_madan_seneta2(p));
        const VgParams b = convert_params(to_bibby_sorensen(p));
        const VgParams c = convert_params(to_kotz_kp(p));
        for (const VgParams& q : {a, b, c}) {
            EXPECT_NEAR(q.r, p.r, 1e-13 * p.r);
            EXPECT_NEAR(q.theta, p.theta, 1e-13);
            EXPECT_NEAR(q.sigma, p.sigma, 1e-13);
            EXPECT_NEAR(q.mu, p.mu, 0.0);
        }
    }
}

TEST(Params, MadanSenetaMapping) {
    const VgParams p = convert_params(MadanSeneta2{2.0, 1.2, 0.8, 0.1});
    EXPECT_DOUBLE_EQ(p.r, 4.0);
    EXPECT_DOUBLE_EQ(p.theta, 0.3);
    EXPECT_DOUBLE_EQ(p.sigma, 0.4);
    EXPECT_THROW(convert_params(BibbySorensen{1.0, 1.0, 1.5, 0.0}), DomainError);
}

// ---- density ----------------------------------------------------------------

TEST(Pdf, MatchesHighPrecisionOracle) {
    // mpmath at 30 digits from the Bessel closed form.
    EXPECT_LT(rel(pdf({3.0, 0.5, 1.0, 0.0}, 1.0), 0.23238974497977941461), 1e-13);
    EXPECT_LT(rel(pdf({1.7, -0.4, 0.9, 0.3}, -0.8), 0.2169366946250674669), 1e-13);
}

TEST(Pdf, LaplaceSpecialCase) {
    // r = 2, theta = 0: Laplace with scale sigma.
    const VgParams p{2.0, 0.0, 1.5, 0.4};
    for (double x : {-3.0, 0.0, 0.41, 5.0})
        EXPECT_LT(rel(pdf(p, x), std::exp(-std::fabs(x - p.mu) / p.sigma) / (2.0 * p.sigma)), 1e-13);
}

TEST(Pdf, EvenShapeClosedFormAgrees) {
    for (double r : {2.0, 4.0, 6.0, 10.0})
        for (double x : {-4.0, -0.3, 0.2, 1.0, 7.0}) {
            const VgParams p{r, 0.6, 1.1, 0.2};
            EXPECT_LT(rel(pdf_even_r(p, x), pdf(p, x)), 1e-12) << r << " " << x;
        }
    EXPECT_THROW(pdf_even_r({3.0, 0.0, 1.0, 0.0}, 1.0), PreconditionError);
}

TEST(Pdf, LogScaleAndBatchAgree) {
    for (const auto& p : kGrid) {
        std::vector<double> xs;
        for (int i = -40; i <= 40; ++i) xs.push_back(p.mu + 0.25 * i + 0.013);
        std::vector<double> out(xs.size());
        log_pdf_batch(p, xs, out);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double lp = pdf(p, xs[i], EvalScale::Log);
            EXPECT_NEAR(lp, std::log(pdf(p, xs[i])), 1e-12 * std::max(1.0, std::fabs(lp)));
            EXPECT_NEAR(out[i], lp, 1e-11 * std::max(1.0, std::fabs(lp)));
        }
    }
}

TEST(Pdf, SingularAtLocationForSmallShape) {
    EXPECT_TRUE(std::isinf(pdf({0.8, 0.1, 1.0, 0.5}, 0.5)));
    EXPECT_TRUE(std::isfinite(pdf({1.2, 0.1, 1.0, 0.5}, 0.5)));
}

TEST(Pdf, AsymptoticFormsBecomeExact) {
    const VgParams p{3.0, 0.4, 1.0, 0.0};
    auto ratio = [&](double x, PdfRegime r) { return pdf_asymptotic(p, x, r) / pdf(p, x); };
    EXPECT_LT(std::fabs(ratio(200.0, PdfRegime::RightTail) - 1.0), std::fabs(ratio(50.0, PdfRegime::RightTail) - 1.0));
    EXPECT_LT(std::fabs(ratio(200.0, PdfRegime::RightTail) - 1.0), 0.01);
    EXPECT_LT(std::fabs(ratio(-200.0, PdfRegime::LeftTail) - 1.0), 0.01);
    for (double r : {0.6, 1.0, 1.5}) {
        const VgParams q{r, 0.4, 1.0, 0.0};
        EXPECT_LT(std::fabs(pdf_asymptotic(q, 1e-7, PdfRegime::NearMu) / pdf(q, 1e-7) - 1.0), 0.02) << r;
    }
}

TEST(Pdf, IntegratesToOneAndReproducesMean) {
    for (const auto& p : kGrid) {
        EXPECT_NEAR(expectation(p, [](double) { return 1.0; }), 1.0, 1e-9);
        EXPECT_NEAR(expectation(p, [](double x) { return x; }), p.mu + p.r * p.theta, 1e-8);
    }
}

// ---- distribution function --------------------------------------------------

TEST(Cdf, MethodsAgree) {
    const VgParams sym{3.0, 0.0, 1.2, 0.5};
    for (double x : {-4.0, 0.0, 0.5, 1.1, 6.0})
        EXPECT_NEAR(cdf(sym, x, CdfMethod::Struve), cdf(sym, x, CdfMethod::Quadrature), 1e-10);
    const VgParams even{4.0, 0.7, 0.9, -0.2};
    for (double x : {-4.0, -0.2, 0.5, 3.0, 12.0})
        EXPECT_NEAR(cdf(even, x, CdfMethod::EvenR), cdf(even, x, CdfMethod::Quadrature), 1e-10);
    EXPECT_THROW(cdf({3.0, 0.3, 1.0, 0.0}, 1.0, CdfMethod::Struve), PreconditionError);
    EXPECT_THROW(cdf({3.0, 0.3, 1.0, 0.0}, 1.0, CdfMethod::EvenR), PreconditionError);
}

TEST(Cdf, SymmetricHalfAtLocation) { EXPECT_NEAR(cdf({2.5, 0.0, 1.0, 1.0}, 1.0), 0.5, 1e-13); }

TEST(Cdf, ComplementAndMonotone) {
    for (const auto& p : kGrid) {
        double prev = 0.0;
        for (int i = -30; i <= 30; ++i) {
            const double x = p.mu + 0.4 * i + 0.007;
            const double c = cdf(p, x);
            EXPECT_GE(c, prev - 1e-13);
            EXPECT_NEAR(c + sf(p, x), 1.0, 1e-10);
            prev = c;
        }
    }
}

TEST(Cdf, SurvivalAvoidsCancellation) {
    const VgParams p{2.0, 0.0, 1.0, 0.0};
    // Laplace: P(X > x) = exp(-x) / 2.
    EXPECT_LT(rel(sf(p, 40.0), 0.5 * std::exp(-40.0)), 1e-8);
}

TEST(Cdf, SortedSweepMatchesPointwise) {
    for (const auto& p : kGrid) {
        std::vector<double> xs;
        for (int i = -50; i <= 50; ++i) xs.push_back(p.mu + 0.17 * i + 0.003);
        std::vector<double> out(xs.size());
        cdf_sorted(p, xs, out);
        for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(out[i], cdf(p, xs[i]), 1e-9);
    }
    std::vector<double> bad{1.0, 0.0};
    std::vector<double> out(2);
    EXPECT_THROW(cdf_sorted(kGrid[0], bad, out), PreconditionError);
}

TEST(Cdf, SurvivalBoundDirection) {
    for (double r : {1.0, 2.0, 3.5}) {
        const VgParams p{r, 0.3, 1.0, 0.0};
        for (double x : {0.5, 2.0, 8.0}) {
            const SurvivalTail t = survival_tail(p, x);
            switch (t.bound_direction) {
                case BoundDirection::Upper: EXPECT_LE(t.survival, t.bound * (1 + 1e-9)); break;
                case BoundDirection::Equality: EXPECT_NEAR(t.survival, t.bound, 1e-9 * t.bound); break;
                case BoundDirection::Lower: EXPECT_GE(t.survival, t.bound * (1 - 1e-9)); break;
            }
        }
    }
    EXPECT_THROW(survival_tail({3.0, -0.1, 1.0, 0.0}, 1.0), PreconditionError);
    EXPECT_THROW(survival_tail({3.0, 0.1, 1.0, 0.0}, -1.0), PreconditionError);
}

TEST(Quantile, InvertsCdf) {
    for (const auto& p : kGrid)
        for (double q : {1e-6, 0.01, 0.3, 0.5, 0.77, 0.999}) EXPECT_NEAR(cdf(p, quantile(p, q)), q, 1e-9);
    EXPECT_THROW(quantile(kGrid[0], 0.0), DomainError);
    EXPECT_THROW(quantile(kGrid[0], 1.0), DomainError);
}

// ---- generating functions ---------------------------------------------------

TEST(GeneratingFunctions, ClosedForms) {
    const VgParams p{3.0, 0.5, 1.0, 0.2};
    for (double t : {-0.5, 0.0, 0.3}) {
        const double m = std::pow(1.0 - 2.0 * p.theta * t - p.sigma * p.sigma * t * t, -p.r / 2.0) * std::exp(p.mu * t);
        EXPECT_LT(rel(mgf(p, t), m), 1e-14);
        EXPECT_NEAR(cgf(p, t), std::log(m), 1e-14);
    }
    const std::complex<double> phi = characteristic_function(p, 0.7);
    const std::complex<double> base(1.0 + p.sigma * p.sigma * 0.49, -2.0 * p.theta * 0.7);
    const std::complex<double> want = std::pow(base, -p.r / 2.0) * std::exp(std::complex<double>(0.0, p.mu * 0.7));
    EXPECT_LT(std::abs(phi - want), 1e-14);
}

TEST(GeneratingFunctions, StripOfConvergence) {
    const VgParams p{3.0, 0.5, 1.0, 0.0};
    EXPECT_THROW(mgf(p, p.lambda_minus()), DomainError);
    EXPECT_THROW(cgf(p, -p.lambda_plus() - 0.1), DomainError);
    const GeneratingFunctions g = generating_functions(p, p.lambda_minus() + 1.0);
    EXPECT_FALSE(g.mgf.has_value());
    EXPECT_FALSE(g.cgf.has_value());
    EXPECT_LE(std::abs(g.cf), 1.0);
}

// ---- moments ----------------------------------------------------------------

TEST(Moments, SummaryClosedForms) {
    const VgParams p{3.0, 1.0, 1.0, 0.0};
    const MomentSet m = moments_summary(p);
    EXPECT_DOUBLE_EQ(m.mean, 3.0);
    EXPECT_NEAR(m.variance, 9.0, 1e-13);
    for (const auto& q : kGrid) {
        const MomentSet s = moments_summary(q);
        const double s2 = q.sigma * q.sigma, t2 = q.theta * q.theta;
        EXPECT_NEAR(s.variance, q.r * (s2 + 2.0 * t2), 1e-12);
        EXPECT_NEAR(s.excess_kurtosis, s.kurtosis - 3.0, 1e-12);
        if (q.theta == 0.0) {
            EXPECT_NEAR(s.skewness, 0.0, 1e-14);
            EXPECT_NEAR(s.excess_kurtosis, 6.0 / q.r, 1e-12);
        }
    }
}

TEST(Moments, RecursionClosedFormAndCumulantsAgree) {
    for (auto p : kGrid) {
        const double mu = p.mu;
        p.mu = 0.0;
        const auto a = raw_moments(p, 8);
        const auto b = raw_moments_closed_form(p, 8);
        for (std::size_t k = 0; k <= 8; ++k) EXPECT_NEAR(a[k], b[k], 1e-11 * std::max(1.0, std::fabs(a[k])));
        p.mu = mu;
        const auto shifted = shift_raw_moments(a, mu);
        const auto from_k = moments_from_cumulants(cumulants(p, 8));
        for (std::size_t k = 1; k <= 8; ++k)
            EXPECT_NEAR(shifted[k], from_k[k], 1e-10 * std::max(1.0, std::fabs(shifted[k])));
        const auto c1 = central_moments(p, 8);
        const auto c2 = central_moments_u(p, 8);
        for (std::size_t k = 0; k <= 8; ++k) EXPECT_NEAR(c1[k], c2[k], 1e-10 * std::max(1.0, std::fabs(c1[k])));
        EXPECT_NEAR(c1[1], 0.0, 1e-13);
    }
    EXPECT_THROW(raw_moments({3.0, 0.1, 1.0, 0.5}, 4), PreconditionError);
}

TEST(Moments, CumulantsMatchCgfDerivatives) {
    const VgParams p{2.3, -0.6, 0.8, 0.1};
    const auto k = cumulants(p, 2);
    const double h = 1e-3;
    const double d1 = (cgf(p, h) - cgf(p, -h)) / (2 * h);
    const double d2 = (cgf(p, h) - 2 * cgf(p, 0.0) + cgf(p, -h)) / (h * h);
    EXPECT_NEAR(k[1], d1, 1e-5);
    EXPECT_NEAR(k[2], d2, 1e-5);
    EXPECT_DOUBLE_EQ(k[0], 0.0);
}

TEST(Moments, AbsoluteMomentOracle) {
    // E|Y| for symmetric r = 3, sigma = 2 equals 8 / pi.
    EXPECT_LT(rel(absolute_moment({3.0, 0.0, 2.0, 0.0}, 1.0), 8.0 / pi), 1e-10);
    // mpmath quadrature of |y|^1.5 against the density, 30 digits.
    EXPECT_LT(rel(absolute_moment({1.0, 0.5, 1.0, 0.0}, 1.5), 1.0720204549560101602), 1e-10);
    // Even integer orders reduce to raw moments.
    const VgParams p{2.7, 0.3, 1.1, 0.0};
    EXPECT_LT(rel(absolute_moment(p, 2.0), raw_moments(p, 2)[2]), 1e-10);
    EXPECT_THROW(absolute_moment({0.5, 0.0, 1.0, 0.0}, -0.6), DomainError);
}

// ---- mode and median --------------------------------------------------------

TEST(Mode, StationaryPointOfDensity) {
    for (const VgParams& p : {VgParams{4.0, 0.5, 1.0, 0.3}, VgParams{6.0, -0.8, 1.2, 0.0},
                              VgParams{3.3, 0.2, 0.7, -1.0}}) {
        const ModeResult m = mode(p);
        EXPECT_GE(m.mode, m.lower - 1e-12);
        EXPECT_LE(m.mode, m.upper + 1e-12);
        const double h = 1e-4;
        EXPECT_GT(pdf(p, m.mode), pdf(p, m.mode + h));
        EXPECT_GT(pdf(p, m.mode), pdf(p, m.mode - h));
    }
}

TEST(Mode, ClosedFormsMatchRootFinder) {
    const VgParams p4{4.0, 0.5, 1.0, 0.3};
    EXPECT_NEAR(mode(p4, ModeMethod::ClosedFormR4).mode, mode(p4, ModeMethod::RootFind).mode, 1e-9);
    const VgParams p6{6.0, -0.8, 1.2, 0.0};
    EXPECT_NEAR(mode(p6, ModeMethod::ClosedFormR6).mode, mode(p6, ModeMethod::RootFind).mode, 1e-9);
    EXPECT_THROW(mode(p4, ModeMethod::ClosedFormR6), PreconditionError);
}

TEST(Mode, AtLocationForSmallShapeOrSymmetry) {
    EXPECT_EQ(mode({1.5, 0.4, 1.0, 0.7}).mode, 0.7);
    EXPECT_EQ(mode({5.0, 0.0, 1.0, -0.2}).mode, -0.2);
}

TEST(Median, ClosedFormsAgreeWithQuantile) {
    EXPECT_EQ(median({3.0, 0.0, 1.0, 1.5}), 1.5);
    const VgParams p{2.0, 0.6, 1.0, 0.1};
    EXPECT_NEAR(median(p), quantile(p, 0.5), 1e-8);
    EXPECT_NEAR(cdf(p, median(p)), 0.5, 1e-9);
}

TEST(Median, ConjectureBoundsOnGrid) {
    for (double r : {1.0, 2.0, 3.5, 8.0})
        for (double theta : {0.1, 1.0, 3.0}) {
            const VgParams p{r, theta, 1.0, 0.0};
            EXPECT_TRUE(check_median_conjecture(p, median(p)).holds()) << r << " " << theta;
        }
    EXPECT_FALSE(check_median_conjecture({2.0, -1.0, 1.0, 0.0}, 0.0).applicable);
}

// ---- Stein, Levy, closure ---------------------------------------------------

TEST(Stein, ResidualVanishesForSmoothTestFunctions) {
    const VgParams p{2.5, -0.3, 0.9, 0.4};
    const TestFunction g{[](double x) { return std::cos(x); }, [](double x) { return -std::sin(x); },
                         [](double x) { return -std::cos(x); }};
    EXPECT_NEAR(stein_residual(p, g), 0.0, 1e-8);
}

TEST(Stein, OperatorSeparatesLaws) {
    const VgParams p{2.5, -0.3, 0.9, 0.4};
    auto op = [](const VgParams& q) {
        // Stein operator of q applied to g(x) = x^2.
        return [q](double w) {
            const double d = w - q.mu, s2 = q.sigma * q.sigma;
            return s2 * d * 2.0 + (s2 * q.r + 2.0 * q.theta * d) * 2.0 * w + (q.r * q.theta - d) * w * w;
        };
    };
    EXPECT_NEAR(expectation(p, op(p)), 0.0, 1e-8);
    VgParams wrong = p;
    wrong.r = 3.0;
    EXPECT_GT(std::fabs(expectation(p, op(wrong))), 1e-2);
}

TEST(Levy, GammaDifferenceForm) {
    const VgParams p{3.0, 0.4, 1.1, 0.0};
    for (double x : {0.01, 0.5, 3.0})
        EXPECT_LT(rel(levy_density(p, x), 0.5 * p.r * std::exp(-p.lambda_minus() * x) / x), 1e-13);
    for (double x : {-0.01, -0.5, -3.0})
        EXPECT_LT(rel(levy_density(p, x), 0.5 * p.r * std::exp(-p.lambda_plus() * -x) / -x), 1e-13);
    EXPECT_THROW(levy_density(p, 0.0), DomainError);
}

TEST(Closure, AffineTransformMatchesMoments) {
    const VgParams p{2.2, 0.5, 0.8, 0.3};
    for (double a : {2.0, -1.5}) {
        const VgParams q = affine_transform(p, a, 1.0);
        const MomentSet mp = moments_summary(p), mq = moments_summary(q);
        EXPECT_NEAR(mq.mean, a * mp.mean + 1.0, 1e-13);
        EXPECT_NEAR(mq.variance, a * a * mp.variance, 1e-12);
        EXPECT_NEAR(mq.skewness, (a > 0 ? 1 : -1) * mp.skewness, 1e-12);
        EXPECT_NEAR(pdf(q, a * 0.7 + 1.0), pdf(p, 0.7) / std::fabs(a), 1e-13);
    }
    EXPECT_THROW(affine_transform(p, 0.0, 1.0), DomainError);
}

TEST(Closure, ConvolutionAddsShapeAndLocation) {
    const VgParams a{1.3, 0.2, 0.9, 0.5}, b{2.1, 0.2, 0.9, -0.1};
    const VgParams c = convolve(a, b);
    EXPECT_DOUBLE_EQ(c.r, 3.4);
    EXPECT_DOUBLE_EQ(c.mu, 0.4);
    const auto ka = cumulants(a, 4), kb = cumulants(b, 4), kc = cumulants(c, 4);
    for (int k = 1; k <= 4; ++k) EXPECT_NEAR(kc[k], ka[k] + kb[k], 1e-12);
    EXPECT_THROW(convolve(a, VgParams{1.0, 0.3, 0.9, 0.0}), PreconditionError);
}

// ---- properties over parameter grids ------------------------------------------

namespace {

std::vector<VgParams> normalisation_grid() {
    std::vector<VgParams> g;
    for (double r : {0.5, 1.0, 2.0, 4.5})
        for (double theta : {-1.0, 0.0, 2.0})
            for (double sigma : {0.3, 1.0}) g.push_back({r, theta, sigma, 0.0});
    return g;
}

}  // namespace

TEST(Properties, NormalisationOverGrid) {
    for (const auto& p : normalisation_grid())
        EXPECT_NEAR(expectation(p, [](double) { return 1.0; }), 1.0, 1e-8) << p.r << " " << p.theta << " " << p.sigma;
}

TEST(Properties, CdfLimitsAndComplement) {
    for (const auto& p : normalisation_grid()) {
        EXPECT_EQ(cdf(p, -INFINITY), 0.0);
        EXPECT_EQ(cdf(p, INFINITY), 1.0);
        EXPECT_LT(cdf(p, -1e3), 1e-12);
        EXPECT_GT(cdf(p, 1e3), 1.0 - 1e-12);
        for (double x : {-2.0, -0.1, 0.3, 4.0}) EXPECT_NEAR(cdf(p, x) + sf(p, x), 1.0, 1e-12);
    }
}

TEST(Properties, GammaLimitAsSigmaVanishes) {
    const double r = 1.7, lambda = 2.0;
    const VgParams p{2.0 * r, 1.0 / (2.0 * lambda), 1e-3, 0.0};
    for (double x : {0.2, 0.8, 2.0}) {
        EXPECT_NEAR(cdf(p, x), boost::math::gamma_p(r, lambda * x), 1e-3) << x;
    }
}

TEST(Properties, NormalLimitForLargeShape) {
    const double r = 1e4, theta = 0.6, sigma = 0.9;
    const VgParams p{r, theta / std::sqrt(r), sigma / std::sqrt(r), -theta * std::sqrt(r)};
    const double sd = std::sqrt(sigma * sigma + 2.0 * theta * theta);
    for (double x : {-1.5, -0.2, 0.0, 0.7, 2.0}) EXPECT_NEAR(cdf(p, x), 0.5 * std::erfc(-x / (sd * std::sqrt(2.0))), 5e-3);
}

TEST(Properties, ModeBelowMeanForPositiveSkew) {
    for (const auto& p : normalisation_grid())
        if (p.theta > 0.0) EXPECT_LE(mode(p).mode, moments_summary(p).mean) << p.r << " " << p.sigma;
}
