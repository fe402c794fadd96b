#pragma once

// Special functions needed by the variance-gamma toolkit.
//
// The modified Bessel function of the second kind K_nu(x) is the workhorse:
// every density, likelihood, E-step and mode computation goes through it.
// Accuracy envelope: relative error <= 1e-10 for 1e-6 <= x <= 700 and
// |nu| <= 60. Outside the envelope the routines still return their best
// estimate without raising; Linear results may overflow to +inf (tiny x,
// large order) or underflow to 0 (x > ~705), which is what Log mode is for.

#include <cstdint>

namespace vg::specfun {

enum class EvalScale { Linear, Log };

// log K_nu(x) together with the ratio K_{nu+1}(x) / K_nu(x).
// Both orders come out of one evaluation, which is what the density,
// E-step and mode code need.
struct BesselKPair {
    double log_k;
    double ratio;
};

// K_nu(x) for real nu and x > 0, or log K_nu(x) when scale == Log.
// Exactly symmetric in nu. Throws DomainError for x <= 0 or non-finite input.
double bessel_k(double nu, double x, EvalScale scale = EvalScale::Linear);

// See BesselKPair. Throws DomainError for x <= 0 or non-finite input.
BesselKPair log_bessel_k_pair(double nu, double x);

// Closed-form K_{m+1/2}(x) as a finite sum times sqrt(pi/2x) e^{-x}.
double bessel_k_half_integer(std::uint32_t m, double x);

// K_{nu-1}(x) / K_nu(x), formed from log values so it never overflows.
// Lies in (0, 1) for nu > 1/2.
double bessel_k_ratio(double nu, double x);

// Central difference (K_{nu+h}(x) - K_{nu-h}(x)) / (2h), 0 < h <= 1e-3.
double bessel_k_order_derivative(double nu, double x, double h = 1e-5);

// Modified Struve function L_nu(x) by its ascending series, truncated once
// the relative term size drops below 1e-14. Throws ConvergenceError past
// 10^6 terms.
double struve_l(double nu, double x);

// Gamma(a, x) = int_x^inf t^{a-1} e^{-t} dt, a > 0, x >= 0.
double upper_incomplete_gamma(double a, double x);

// Gauss hypergeometric 2F1(a, b; c; z) for 0 <= z < 1. For z > 1/2 the
// Euler transformation (1-z)^{c-a-b} 2F1(c-a, c-b; c; z) is used whenever
// it terminates or decays faster, which is always the case for the moment
// formulas in this library.
double gauss_2f1(double a, double b, double c, double z);

// U(-m, b, x) as the terminating Pochhammer sum
// (-1)^m sum_j C(m,j) (b+j)_{m-j} (-x)^j, with (a)_0 = 1.
double hyp_u_poly(std::uint32_t m, double b, double x);

double log_gamma(double x);

}  // namespace vg::specfun
