#pragma once

// The VG(r, theta, sigma, mu) law: density, distribution function,
// quantiles, generating functions, moments, cumulants, mode, median,
// Stein residual and Levy density.

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "vg/params.hpp"
#include "vg/specfun.hpp"

namespace vg {

using specfun::EvalScale;

// ---- density -------------------------------------------------------------

// Density at x, or its log when scale == Log. At x == mu with r <= 1 the
// density is singular and +infinity is returned (Log: +infinity as well).
double pdf(const VgParams& p, double x, EvalScale scale = EvalScale::Linear);

// log pdf at every x; the Bessel evaluations go through the batch kernel.
void log_pdf_batch(const VgParams& p, std::span<const double> x, std::span<double> out);

// Elementary closed form for even integer r. Throws PreconditionError otherwise.
double pdf_even_r(const VgParams& p, double x);

enum class PdfRegime { NearMu, RightTail, LeftTail };

// Leading-order behaviour near mu (three cases in r) and in both tails.
// Tail forms use the offset |x - mu| in the power factor.
double pdf_asymptotic(const VgParams& p, double x, PdfRegime regime);

// ---- distribution function ------------------------------------------------

enum class CdfMethod { Auto, Struve, EvenR, Quadrature };

// Auto: Struve closed form when theta == 0 and |x-mu|/sigma <= 40, incomplete
// gamma closed form when r is an even integer <= 40, quadrature otherwise.
// Forcing a method that does not apply throws PreconditionError.
double cdf(const VgParams& p, double x, CdfMethod method = CdfMethod::Auto);

// 1 - cdf, computed without cancellation in the right tail.
double sf(const VgParams& p, double x);

// cdf at every point of an ascending sequence, accumulating the density
// between neighbours. Intended for goodness-of-fit statistics on large
// samples. Throws PreconditionError when x is not sorted.
void cdf_sorted(const VgParams& p, std::span<const double> x, std::span<double> out);

enum class BoundDirection { Upper, Equality, Lower };

struct SurvivalTail {
    double survival;    // P(X > x)
    double asymptotic;  // leading-order tail approximation
    double bound;       // pdf(x) / lambda_minus
    BoundDirection bound_direction;  // survival <= bound (Upper), == (Equality), >= (Lower)
};

// Requires theta >= 0 and x > mu; throws PreconditionError otherwise.
SurvivalTail survival_tail(const VgParams& p, double x);

// x with |cdf(x) - q| <= 1e-9. Throws DomainError unless 0 < q < 1.
double quantile(const VgParams& p, double q);

// ---- generating functions -------------------------------------------------

struct GeneratingFunctions {
    std::optional<double> mgf;  // empty outside -lambda_plus < t < lambda_minus
    std::complex<double> cf;
    std::optional<double> cgf;
};

GeneratingFunctions generating_functions(const VgParams& p, double t);
std::complex<double> characteristic_function(const VgParams& p, double t);
// Both throw DomainError outside -lambda_plus < t < lambda_minus.
double mgf(const VgParams& p, double t);
double cgf(const VgParams& p, double t);

// ---- moments and cumulants ------------------------------------------------
// Every sequence below is indexed by order: element k belongs to order k.

struct MomentSet {
    std::vector<double> raw;      // E[X^k], k = 0..4
    std::vector<double> central;  // E[(X - EX)^k], k = 0..4
    double mean;
    double variance;
    double skewness;
    double kurtosis;
    double excess_kurtosis;
};

MomentSet moments_summary(const VgParams& p);

// Raw moments of VG(r, theta, sigma, 0) up to order k by the three-term
// recursion. Requires mu == 0 (PreconditionError otherwise).
std::vector<double> raw_moments(const VgParams& p, std::size_t k);
// Same values from the hypergeometric closed form.
std::vector<double> raw_moments_closed_form(const VgParams& p, std::size_t k);
// E[(Y + mu)^k] from raw moments of Y.
std::vector<double> shift_raw_moments(std::span<const double> raw, double mu);

// E|Y|^k for Y ~ VG(r, theta, sigma, 0), real k > max(-1, -r).
// Requires mu == 0; throws DomainError for k at or below the threshold.
double absolute_moment(const VgParams& p, double k);

// Central moments up to order k by the four-term recursion.
std::vector<double> central_moments(const VgParams& p, std::size_t k);
// Same values from the gamma-difference representation and U(-m, b, x).
std::vector<double> central_moments_u(const VgParams& p, std::size_t k);

// kappa_0 = 0, kappa_1 .. kappa_k.
std::vector<double> cumulants(const VgParams& p, std::size_t k);
// Moments from cumulants (element 0 of `kappa` ignored): raw moments when
// kappa_1 is the mean, central moments when kappa_1 is replaced by 0.
std::vector<double> moments_from_cumulants(std::span<const double> kappa);

// ---- mode and median -------------------------------------------------------

enum class ModeMethod { AtMu, ClosedFormR4, ClosedFormR6, RootFind };

struct ModeResult {
    double mode;
    ModeMethod method;
    double lower;  // bracket from the mode inequalities, shifted by mu
    double upper;
};

ModeResult mode(const VgParams& p);
// Method override for cross-checks; ClosedFormR4/R6 need r == 4/6, RootFind needs r > 2 and theta != 0.
ModeResult mode(const VgParams& p, ModeMethod method);

struct MedianConjectureCheck {
    bool applicable;     // r, theta, sigma > 0
    bool lower_ok;       // mu + (r-1) theta < Med
    bool middle_ok;      // Med < mu + r theta exp(-2/(3r))
    bool chain_ok;       // r theta exp(-2/(3r)) < (r - 2/3 + 2/(9r)) theta
    bool r2_bound_ok;    // Med <= mu + (r + 2 log 2 - 2) theta, checked for r >= 2
    bool holds() const noexcept { return !applicable || (lower_ok && middle_ok && chain_ok && r2_bound_ok); }
};

MedianConjectureCheck check_median_conjecture(const VgParams& p, double median);

// theta == 0: mu; r == 2: closed form; otherwise quantile(0.5). A violated
// conjecture bound is reported through vg::log_finding, never thrown.
double median(const VgParams& p);

// ---- Stein characterisation, Levy density, closure -------------------------

struct TestFunction {
    std::function<double(double)> g;
    std::function<double(double)> dg;
    std::function<double(double)> d2g;
};

// E[sigma^2 (W-mu) g'' + (sigma^2 r + 2 theta (W-mu)) g' + (r theta - (W-mu)) g]
// under W ~ VG(p), by quadrature at the requested absolute tolerance.
// Throws ConvergenceError when the quadrature error estimate exceeds quad_tol.
double stein_residual(const VgParams& p, const TestFunction& g, double quad_tol = 1e-9);

// E[f(W)] by the same split quadrature; f must be integrable against the law.
double expectation(const VgParams& p, const std::function<double(double)>& f, double tol = 1e-11);

// Throws DomainError at x == 0.
double levy_density(const VgParams& p, double x);

// a X + b. Throws DomainError for a == 0.
VgParams affine_transform(const VgParams& p, double a, double b);

// Law of X1 + X2. Throws PreconditionError unless theta and sigma match exactly.
VgParams convolve(const VgParams& p1, const VgParams& p2);

}  // namespace vg
