#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "vg/distribution.hpp"
#include "vg/error.hpp"
#include "vg/estimation.hpp"
#include "vg/sampling.hpp"

using namespace vg;

namespace {

DataSet synthetic(const VgParams& p, std::size_t n, std::uint64_t seed) {
    RngStream rng(seed);
    return make_dataset(sample_vg_normal_gamma(p, rng, n).values, "synthetic");
}

}  // namespace

TEST(DataSet, Validation) {
    EXPECT_THROW(make_dataset({1, 2, 3}), PreconditionError);
    EXPECT_THROW(make_dataset({1, 2, 3, 4, 5, 6, 7, NAN}), DomainError);
    EXPECT_NO_THROW(make_dataset({1, 2, 3, 4, 5, 6, 7, 8}));
}

TEST(Likelihood, SumOfLogDensities) {
    const DataSet d = synthetic({3.0, 0.4, 1.0, 0.0}, 200, 2);
    const VgParams q{2.5, 0.3, 1.1, 0.1};
    double want = 0.0;
    for (double x : d.observations) want -= pdf(q, x, EvalScale::Log);
    EXPECT_NEAR(negative_log_likelihood(d, q), want, 1e-10 * std::fabs(want));
}

TEST(Likelihood, SingularWhenShapeAtMostOneAndMuOnAnObservation) {
    DataSet d = synthetic({3.0, 0.4, 1.0, 0.0}, 50, 2);
    const double x3 = d.observations[3];
    const LikelihoodEval e = evaluate_likelihood(d, {0.8, 0.1, 1.0, x3});
    EXPECT_TRUE(e.singular);
    EXPECT_EQ(e.singular_index, 3u);
    EXPECT_EQ(e.nll, -INFINITY);
    EXPECT_FALSE(evaluate_likelihood(d, {1.2, 0.1, 1.0, x3}).singular);
}

TEST(MomentFits, SymmetricRecoversParameters) {
    const DataSet d = synthetic({4.0, 0.0, 1.0, 0.5}, 200000, 8);
    const FitResult f = mom_symmetric(d);
    EXPECT_EQ(f.params.theta, 0.0);
    EXPECT_NEAR(f.params.mu, 0.5, 0.02);
    EXPECT_NEAR(f.params.sigma, 1.0, 0.05);
    EXPECT_NEAR(f.params.r, 4.0, 0.4);
}

TEST(MomentFits, SymmetricRejectsLightTails) {
    std::vector<double> x;
    for (int i = 0; i < 100; ++i) x.push_back(i % 2 ? 1.0 : -1.0);
    EXPECT_THROW(mom_symmetric(make_dataset(x)), FitError);
}

TEST(MomentFits, StartAndGeneralAreClose) {
    const VgParams truth{4.0, 1.0, 1.0, 0.0};
    const DataSet d = synthetic(truth, 100000, 9);
    const VgParams s = moment_start(d);
    const FitResult g = mom_general(d);
    for (const VgParams& q : {s, g.params}) {
        EXPECT_NEAR(q.r, truth.r, 0.8);
        EXPECT_NEAR(q.theta, truth.theta, 0.2);
        EXPECT_NEAR(q.sigma, truth.sigma, 0.2);
    }
    EXPECT_LT(g.objective, 1e-6);
}

TEST(Ecm, EStepSatisfiesJensen) {
    const DataSet d = synthetic({3.0, 0.5, 1.0, 0.0}, 500, 4);
    EcmState st = ecm_initial_state({3.0, 0.5, 1.0, 0.0});
    ecm_e_step(d, st);
    for (std::size_t i = 0; i < d.observations.size(); ++i) {
        EXPECT_GT(st.s_hat[i], 0.0);
        // E[log S] <= log E[S] and 1 / E[1/S] <= E[S].
        EXPECT_LE(st.log_s_hat[i], std::log(st.s_hat[i]) + 1e-12);
        EXPECT_LE(1.0 / st.inv_s_hat[i], st.s_hat[i] * (1.0 + 1e-12));
    }
}

TEST(Ecm, ParametrisationRoundTrip) {
    const VgParams p{2.6, -0.4, 0.7, 0.3};
    const VgParams q = ecm_state_params(ecm_initial_state(p));
    EXPECT_NEAR(q.r, p.r, 1e-13);
    EXPECT_NEAR(q.theta, p.theta, 1e-13);
    EXPECT_NEAR(q.sigma, p.sigma, 1e-13);
    EXPECT_EQ(q.mu, p.mu);
}

TEST(Ecm, TraceIsMonotone) {
    const DataSet d = synthetic({4.0, 1.0, 1.0, 0.0}, 5000, 12);
    const FitResult f = ecm_fit(d);
    ASSERT_GE(f.loglik_trace.size(), 2u);
    for (std::size_t i = 1; i < f.loglik_trace.size(); ++i)
        EXPECT_GE(f.loglik_trace[i], f.loglik_trace[i - 1] - 1e-10 * std::max(1.0, std::fabs(f.loglik_trace[i - 1])));
    EXPECT_TRUE(f.converged);
    EXPECT_NEAR(f.loglik, -negative_log_likelihood(d, f.params), 1e-8 * std::fabs(f.loglik));
}

TEST(Ecm, AgreesWithDirectMaximisation) {
    const DataSet d = synthetic({4.0, 1.0, 1.0, 0.0}, 3000, 21);
    EcmOptions eo;
    eo.rel_tol = 1e-12;
    eo.max_iterations = 20000;
    MleOptions mo;
    mo.rel_tol = 1e-12;
    const FitResult e = ecm_fit(d, std::nullopt, eo);
    const FitResult m = mle_fit(d, std::nullopt, mo);
    EXPECT_NEAR(e.loglik, m.loglik, 1e-4);
    // The likelihood is flat near the optimum, so the arguments agree only loosely.
    EXPECT_NEAR(e.params.r, m.params.r, 1e-2 * m.params.r);
    EXPECT_NEAR(e.params.theta, m.params.theta, 1e-2);
    EXPECT_NEAR(e.params.sigma, m.params.sigma, 1e-2);
    EXPECT_NEAR(e.params.mu, m.params.mu, 1e-2);
}

TEST(Ecm, OneIterationIncreasesLikelihood) {
    const DataSet d = synthetic({4.0, 1.0, 1.0, 0.0}, 2000, 31);
    EcmState st = ecm_initial_state({2.0, 0.3, 1.5, 0.4});
    const double before = -negative_log_likelihood(d, ecm_state_params(st));
    ecm_iteration(d, st);
    EXPECT_GT(-negative_log_likelihood(d, ecm_state_params(st)), before);
}

TEST(Ecm, TrueParametersAreNearlyStationary) {
    const VgParams truth{4.0, 1.0, 1.0, 0.0};
    const DataSet d = synthetic(truth, 100000, 41);
    EcmState st = ecm_initial_state(truth);
    const EcmState start = st;
    ecm_e_step(d, st, EStepParts::SAndInvS);
    ecm_cm_step_location_scale(d, st);
    ecm_e_step(d, st, EStepParts::SAndLogS);
    ecm_cm_step_alpha(d, st);
    EXPECT_LT(std::fabs(st.alpha / start.alpha - 1.0), 1e-2);
    EXPECT_LT(std::fabs(st.theta0 / start.theta0 - 1.0), 1e-2);
    EXPECT_LT(std::fabs(st.sigma0 / start.sigma0 - 1.0), 1e-2);
    // mu = 0, so measure its move against the standard deviation.
    EXPECT_LT(std::fabs(st.mu - start.mu) / std::sqrt(12.0), 1e-2);
}

TEST(Ecm, SymmetricDataGivesSmallSkew) {
    const DataSet d = synthetic({4.0, 0.0, 1.0, 0.0}, 20000, 51);
    const FitResult f = ecm_fit(d);
    EXPECT_LT(std::fabs(to_madan_seneta2(f.params).theta0), 0.05);
}

TEST(Equivariance, AffineDataGivesAffineFit) {
    const DataSet d = synthetic({3.0, 0.6, 1.0, 0.2}, 2000, 61);
    EcmOptions eo;
    eo.rel_tol = 1e-12;
    eo.max_iterations = 20000;
    MleOptions mo;
    mo.rel_tol = 1e-12;
    for (const auto& [a, b] : {std::pair{2.5, -1.0}, std::pair{-0.5, 3.0}}) {
        std::vector<double> y = d.observations;
        for (double& v : y) v = a * v + b;
        const DataSet dy = make_dataset(y);
        const std::pair<FitResult, FitResult> fits[] = {{ecm_fit(d, std::nullopt, eo), ecm_fit(dy, std::nullopt, eo)},
                                                        {mle_fit(d, std::nullopt, mo), mle_fit(dy, std::nullopt, mo)}};
        for (const auto& [raw, moved] : fits) {
            const VgParams back = affine_transform(moved.params, 1.0 / a, -b / a);
            EXPECT_NEAR(back.r, raw.params.r, 2e-2 * raw.params.r) << a;
            EXPECT_NEAR(back.theta, raw.params.theta, 2e-2) << a;
            EXPECT_NEAR(back.sigma, raw.params.sigma, 2e-2) << a;
            EXPECT_NEAR(back.mu, raw.params.mu, 2e-2) << a;
            // Log-likelihoods differ by exactly n log |a| at equivalent parameters.
            EXPECT_NEAR(moved.loglik + d.observations.size() * std::log(std::fabs(a)), raw.loglik, 1e-3);
        }
    }
}

TEST(Consistency, MedianErrorShrinksWithSampleSize) {
    const VgParams truth{4.0, 1.0, 1.0, 0.0};
    for (FitMethod method : {FitMethod::MoM, FitMethod::MLE, FitMethod::ECM}) {
        // Moment fits are cheap and far noisier, so they get more replications.
        const int kReps = method == FitMethod::MoM ? 25 : 3;
        std::array<double, 4> prev;
        prev.fill(INFINITY);
        for (std::size_t n : {1000u, 10000u, 100000u}) {
            std::array<std::vector<double>, 4> err;
            for (int rep = 0; rep < kReps; ++rep) {
                const DataSet d = synthetic(truth, n, 1000 * n + rep);
                const VgParams q = method == FitMethod::MoM ? mom_general(d).params
                                   : method == FitMethod::MLE ? mle_fit(d).params
                                                              : ecm_fit(d).params;
                err[0].push_back(std::fabs(q.r - truth.r));
                err[1].push_back(std::fabs(q.theta - truth.theta));
                err[2].push_back(std::fabs(q.sigma - truth.sigma));
                err[3].push_back(std::fabs(q.mu - truth.mu));
            }
            for (int k = 0; k < 4; ++k) {
                std::nth_element(err[k].begin(), err[k].begin() + kReps / 2, err[k].end());
                const double med = err[k][kReps / 2];
                EXPECT_LT(med, prev[k]) << static_cast<int>(method) << " n=" << n << " param " << k;
                prev[k] = med;
            }
        }
    }
}
