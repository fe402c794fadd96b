#pragma once

// Fitting VG parameters to i.i.d. data: moment matching, direct likelihood
// maximisation, and the ECM iteration on the normal-gamma mixture.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vg/params.hpp"

namespace vg {

struct DataSet {
    std::vector<double> observations;
    std::string provenance;
};

// Throws DomainError for non-finite values and PreconditionError for n < 8.
DataSet make_dataset(std::vector<double> observations, std::string provenance = {});

enum class FitMethod { MoM, MLE, ECM };

struct FitResult {
    VgParams params;
    double loglik = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    FitMethod method = FitMethod::MoM;
    double objective = 0.0;            // mom_general: moment objective at the optimum
    bool singular = false;             // mle_fit: r <= 1 with mu locked onto an observation
    std::vector<double> loglik_trace;  // ecm_fit: log-likelihood after every iteration
};

// theta = 0 moment fit: mu = mean, sigma0^2 = variance (1/n), nu from the
// fourth central moment, r = 2/nu. Throws FitError when nu <= 0.
FitResult mom_symmetric(const DataSet& data);

// Simplex minimisation of sum_j ((m_j - mu'_j) / m_j)^2 over the first four
// raw moments. A sample moment below 1e-8 sd^j in magnitude has its
// denominator replaced by max(|m_j|, sd^j).
FitResult mom_general(const DataSet& data, const VgParams& init);
FitResult mom_general(const DataSet& data);  // init from moment_start

// Starting point from sample mean, variance, skewness and excess kurtosis:
// the cumulant equations are solved for theta^2/sigma^2 by bisection, with
// the excess floored at 0.03 and the skewness capped at the VG boundary.
// Auto init of mle_fit and ecm_fit.
VgParams moment_start(const DataSet& data);

struct LikelihoodEval {
    double nll;                 // -inf when singular
    bool singular;              // r <= 1 and some observation equals mu
    std::size_t singular_index; // first such observation
};

LikelihoodEval evaluate_likelihood(const DataSet& data, const VgParams& p);
// -sum log p(x_i); -infinity when the likelihood is singular.
double negative_log_likelihood(const DataSet& data, const VgParams& p);

struct MleOptions {
    std::size_t max_iterations = 20000;  // simplex steps over all rounds
    double rel_tol = 1e-8;
    int mu_refinements = 4;
};

// Simplex over (log r, theta, log sigma, mu) alternated with a bracketed
// one-dimensional search in mu. Auto init (nullopt) uses mom_general.
FitResult mle_fit(const DataSet& data, std::optional<VgParams> init = std::nullopt, const MleOptions& opt = {});

// ECM state in the (alpha, theta0, sigma0, mu) parametrisation.
struct EcmState {
    double alpha;
    double theta0;
    double sigma0;
    double mu;
    std::vector<double> s_hat;
    std::vector<double> inv_s_hat;
    std::vector<double> log_s_hat;
    double loglik = 0.0;
    std::size_t iter = 0;
};

struct EcmOptions {
    std::size_t max_iterations = 1000;
    double rel_tol = 1e-8;
    double delta_reg = 1e-3;    // offsets with gamma * delta below this are floored to it
    double deriv_step = 1e-5;   // order step for dK/dnu
    double alpha_min = 1e-3;
    double alpha_max = 1e3;
};

EcmState ecm_initial_state(const VgParams& p);

enum class EStepParts { SAndInvS, SAndLogS, All };

// Conditional expectations of S, 1/S and log S given each observation.
void ecm_e_step(const DataSet& data, EcmState& state, EStepParts parts = EStepParts::All,
                const EcmOptions& opt = {});

// Closed-form updates of mu, theta0, sigma0 from s_hat and inv_s_hat.
// Throws FitError when the variance update is not positive.
void ecm_cm_step_location_scale(const DataSet& data, EcmState& state);

// alpha by bounded one-dimensional maximisation of the full likelihood at the
// current (theta0, sigma0, mu); the current alpha is kept when nothing improves.
void ecm_cm_step_alpha(const DataSet& data, EcmState& state, const EcmOptions& opt = {});

// Both conditional maximisations back to back, on the current expectations.
void ecm_cm_step(const DataSet& data, EcmState& state, const EcmOptions& opt = {});

// One iteration: E-step (S, 1/S), location/scale CM-step, E-step (S, log S), alpha CM-step.
void ecm_iteration(const DataSet& data, EcmState& state, const EcmOptions& opt = {});

FitResult ecm_fit(const DataSet& data, std::optional<VgParams> init = std::nullopt, const EcmOptions& opt = {});

VgParams ecm_state_params(const EcmState& state);

}  // namespace vg
