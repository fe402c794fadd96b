#pragma once

// Variance-gamma Levy process X(t) = theta G(t) + sigma B(G(t)), where G is a
// gamma subordinator with E G(t) = t and Var G(t) = nu t.

#include <complex>
#include <span>
#include <vector>

#include "vg/params.hpp"
#include "vg/sampling.hpp"

namespace vg {

struct VgProcessParams {
    double sigma = 1.0;  // > 0
    double nu = 1.0;     // > 0
    double theta = 0.0;

    // Throws DomainError unless sigma, nu > 0 and all fields are finite.
    void validate() const;
};

// times[0] = 0, strictly increasing; values[0] = 0; increments[k] = values[k+1] - values[k].
struct PathGrid {
    std::vector<double> times;
    std::vector<double> increments;
    std::vector<double> values;
};

// X(t) = gamma_p(t) - gamma_n(t); gamma(t; m, v) ~ Gamma(m^2 t / v, rate m / v).
struct GammaDifferenceDecomposition {
    double mu_p;
    double mu_n;
    double nu_p;
    double nu_n;
};

GammaDifferenceDecomposition gamma_difference_decomposition(const VgProcessParams& pp);

// X(t + h) - X(t) ~ VG(2h/nu, theta nu / 2, sigma sqrt(nu/2), 0). Throws DomainError unless h > 0.
VgParams increment_params(const VgProcessParams& pp, double h);

// Throws PreconditionError unless times starts at 0 and increases strictly.
void validate_grid(std::span<const double> times);

// Increment over a step h: theta tau + sigma sqrt(tau) Z with tau ~ Gamma(h/nu, rate 1/nu).
PathGrid simulate_path_subordinator(const VgProcessParams& pp, std::span<const double> times, RngStream& rng);

// Component paths of the gamma-difference construction, on the same grid.
struct GammaComponents {
    std::vector<double> gamma_p;
    std::vector<double> gamma_n;
};

// Path as gamma_p - gamma_n with independent gamma-process increments.
// When `components` is non-null it receives both nondecreasing paths.
PathGrid simulate_path_gamma_difference(const VgProcessParams& pp, std::span<const double> times, RngStream& rng,
                                        GammaComponents* components = nullptr);

// Uniform grid 0, t/steps, ..., t. Throws DomainError unless t > 0 and steps >= 1.
std::vector<double> uniform_grid(double t, std::size_t steps);

struct ProcessMoments {
    double mean;
    double variance;
    double central3;
    double central4;
    double kurtosis() const { return central4 / (variance * variance); }
};

// Moments of X(t) as polynomials in t. Throws DomainError unless t > 0.
ProcessMoments process_moments(const VgProcessParams& pp, double t);

// (1 - i theta nu u + sigma^2 nu u^2 / 2)^{-t/nu}. Throws DomainError unless t > 0.
std::complex<double> process_cf(const VgProcessParams& pp, double t, double u);

// Levy density of the process; throws DomainError at x = 0.
double process_levy_density(const VgProcessParams& pp, double x);

struct ProcessCfLevy {
    std::complex<double> cf;
    double levy_density;
};

ProcessCfLevy process_cf_levy(const VgProcessParams& pp, double t, double u, double x);

}  // namespace vg
