#pragma once

// Stock dynamics S(t) = S0 exp(m t + X(t) + omega t) driven by a VG process,
// and European call prices under the risk-neutral version (m = r).

#include <span>

#include "vg/params.hpp"
#include "vg/process.hpp"
#include "vg/sampling.hpp"

namespace vg {

// nu^{-1} log(1 - theta nu - sigma^2 nu / 2), so that E exp(X(t)) = exp(-omega t).
// Throws DomainError when the log argument is not positive.
double omega(const VgProcessParams& pp);

enum class ModelKind { Statistical, RiskNeutral };

struct VgStockModel {
    double s0;
    double rate_or_drift;  // m (Statistical) or r (RiskNeutral)
    VgProcessParams pp;
    double omega;
    ModelKind kind;
};

// Validated constructor; fills omega. Throws DomainError on s0 <= 0,
// non-finite inputs or an infeasible omega.
VgStockModel make_stock_model(double s0, double rate_or_drift, const VgProcessParams& pp, ModelKind kind);

// Unit-time log return: VG(2/nu, theta nu / 2, sigma sqrt(nu/2), m + omega).
VgParams log_return_params(const VgStockModel& model);

// log(S(t)/S0): VG(2t/nu, theta nu / 2, sigma sqrt(nu/2), (m + omega) t).
VgParams log_price_relative_params(const VgStockModel& model, double t);

struct PricingInputs {
    VgStockModel model;  // RiskNeutral
    double strike;
    double maturity;
};

// Throws PreconditionError unless the model is risk neutral, DomainError on
// non-positive strike or maturity.
void validate_pricing_inputs(const PricingInputs& inp);

struct CallPrice {
    double price;
    double abs_error;  // quadrature error estimate (plus truncation bound for CF inversion)
};

// e^{-rt} E[ conditional Black-Scholes value given the gamma time change ],
// integrated against the Gamma(t/nu, rate 1/nu) density. Target absolute
// error 1e-8 S0; throws ConvergenceError when the estimate exceeds it.
CallPrice call_gamma_quadrature(const PricingInputs& inp);

// Damped characteristic-function inversion for a single strike. Throws
// PreconditionError when a + 1 lies outside the MGF strip of X(t) and
// ConvergenceError when the integral misses 1e-8 S0.
CallPrice call_cf_inversion(const PricingInputs& inp, double damping = 1.1);

// Standard Black-Scholes call. Throws DomainError unless all inputs are
// positive (sigma_bs = 0 is accepted and gives the discounted intrinsic value).
double black_scholes_call(double s0, double strike, double rate, double sigma_bs, double t);

// Standard normal distribution function.
double normal_cdf(double x);

// Prices S(t_k) = S0 exp((m or r) t_k + X(t_k) + omega t_k) along one path of
// the subordinator construction. values[0] = S0.
PathGrid simulate_stock(const VgStockModel& model, std::span<const double> times, RngStream& rng);

struct MonteCarloCheck {
    double mean;
    double std_err;
};

// Sample mean and standard error of e^{-r t} S(t) over `paths` single-step paths.
MonteCarloCheck discounted_spot_mc(const VgStockModel& model, double t, std::size_t paths, RngStream& rng);

// Sample mean and standard error of e^{-r t} max(S(t) - K, 0).
MonteCarloCheck call_mc(const PricingInputs& inp, std::size_t paths, RngStream& rng);

}  // namespace vg
