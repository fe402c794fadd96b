#include "vg/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "density_detail.hpp"
#include "vg/error.hpp"
#include "vg/kernels.hpp"

namespace vg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + ": argument must be finite");
}

bool is_even_integer(double r) { return r >= 2.0 && r == 2.0 * std::round(0.5 * r); }

// log of 1 / (2^{r/2} s^{r/2} Gamma(r/2)), the common tail prefactor.
double log_tail_prefactor(const detail::Prepared& pp) {
    return -0.5 * pp.p.r * (std::numbers::ln2 + std::log(pp.s)) - std::lgamma(0.5 * pp.p.r);
}

// ---- closed-form distribution functions -----------------------------------

// Symmetric case: F = 1/2 + d/(2 sigma) [K_nu(y) L_{nu-1}(y) + L_nu(y) K_{nu-1}(y)], y = |d|/sigma.
double cdf_struve(const detail::Prepared& pp, double d) {
    if (d == 0.0) return 0.5;
    const double y = std::fabs(d) / pp.p.sigma;
    const double nu = pp.nu;
    const double bracket = specfun::bessel_k(nu, y) * specfun::struve_l(nu - 1.0, y) +
                           specfun::struve_l(nu, y) * specfun::bessel_k(nu - 1.0, y);
    const double f = 0.5 + d / (2.0 * pp.p.sigma) * bracket;
    return std::clamp(f, 0.0, 1.0);
}

// Mass beyond offset |d| on one side for even r: the density is a finite sum
// of u^{m-j} e^{-lambda u} terms, each integrating to an incomplete gamma.
double even_r_tail(const detail::Prepared& pp, int side, double u) {
    const int half = static_cast<int>(std::lround(0.5 * pp.p.r));
    const int m = half - 1;
    const double lambda = side > 0 ? pp.lambda_minus : pp.lambda_plus;
    // sum_j c_j (sigma^2 lambda / (2 s))^j Gamma(r/2 - j, lambda u) / (2^{r/2} (s lambda)^{r/2} Gamma(r/2))
    const double w = pp.sigma2 * lambda / (2.0 * pp.s);
    const double log_pre = -0.5 * pp.p.r * (std::numbers::ln2 + std::log(pp.s * lambda)) - std::lgamma(0.5 * pp.p.r);
    double coeff = 1.0;  // c_j = (m+j)! / ((m-j)! j!)
    double total = 0.0;
    for (int j = 0; j <= m; ++j) {
        if (j > 0) coeff *= static_cast<double>((m + j) * (m - j + 1)) / j;
        const double a = static_cast<double>(half - j);
        const double log_term = log_pre + j * std::log(w) + std::log(coeff) +
                                std::log(specfun::upper_incomplete_gamma(a, lambda * u));
        total += std::exp(log_term);
    }
    return total;
}

double cdf_even_r(const detail::Prepared& pp, double d) {
    if (d <= 0.0) return std::clamp(even_r_tail(pp, -1, -d), 0.0, 1.0);
    return std::clamp(1.0 - even_r_tail(pp, +1, d), 0.0, 1.0);
}

// Mass beyond offset u on one side by quadrature in the offset variable.
double side_tail_quadrature(const detail::Prepared& pp, int side, double u) {
    auto h = [&](double t) { return pp.side_density(side, t); };
    return detail::integrate_side(pp, side, u, h).value;
}

double cdf_quadrature(const detail::Prepared& pp, double d) {
    if (d <= 0.0) return std::clamp(side_tail_quadrature(pp, -1, -d), 0.0, 1.0);
    return std::clamp(1.0 - side_tail_quadrature(pp, +1, d), 0.0, 1.0);
}

CdfMethod auto_method(const detail::Prepared& pp, double d) {
    if (pp.p.theta == 0.0 && std::fabs(d) / pp.p.sigma <= 40.0) return CdfMethod::Struve;
    if (is_even_integer(pp.p.r) && pp.p.r <= 40.0) return CdfMethod::EvenR;
    return CdfMethod::Quadrature;
}

double cdf_prepared(const detail::Prepared& pp, double x, CdfMethod method) {
    if (x == -kInf) return 0.0;
    if (x == kInf) return 1.0;
    require_finite(x, "cdf");
    const double d = x - pp.p.mu;
    if (method == CdfMethod::Auto) method = auto_method(pp, d);
    switch (method) {
        case CdfMethod::Struve:
            if (pp.p.theta != 0.0) throw PreconditionError("cdf: Struve form needs theta == 0");
            return cdf_struve(pp, d);
        case CdfMethod::EvenR:
            if (!is_even_integer(pp.p.r)) throw PreconditionError("cdf: closed form needs even integer r");
            return cdf_even_r(pp, d);
        case CdfMethod::Quadrature:
        case CdfMethod::Auto:
            break;
    }
    return cdf_quadrature(pp, d);
}

double sf_prepared(const detail::Prepared& pp, double x) {
    if (x == -kInf) return 1.0;
    if (x == kInf) return 0.0;
    require_finite(x, "sf");
    const double d = x - pp.p.mu;
    if (d <= 0.0) return 1.0 - cdf_prepared(pp, x, CdfMethod::Auto);
    switch (auto_method(pp, d)) {
        case CdfMethod::EvenR:
            return std::clamp(even_r_tail(pp, +1, d), 0.0, 1.0);
        case CdfMethod::Struve: {
            // The Struve form is 1/2 plus a correction, so a small complement has lost its digits.
            const double c = 1.0 - cdf_struve(pp, d);
            if (c >= 1e-2) return c;
            if (is_even_integer(pp.p.r) && pp.p.r <= 40.0) return std::clamp(even_r_tail(pp, +1, d), 0.0, 1.0);
            return std::clamp(side_tail_quadrature(pp, +1, d), 0.0, 1.0);
        }
        default:
            return std::clamp(side_tail_quadrature(pp, +1, d), 0.0, 1.0);
    }
}

}  // namespace

// ---- density ---------------------------------------------------------------

double pdf(const VgParams& p, double x, EvalScale scale) {
    require_finite(x, "pdf");
    const detail::Prepared pp(p);
    const double lp = pp.log_density_at_offset(x - p.mu);
    return scale == EvalScale::Log ? lp : std::exp(lp);
}

void log_pdf_batch(const VgParams& p, std::span<const double> x, std::span<double> out) {
    if (x.size() != out.size()) throw PreconditionError("log_pdf_batch: size mismatch");
    const detail::Prepared pp(p);
    const std::size_t n = x.size();
    std::vector<double> ad(n);
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        require_finite(x[i], "log_pdf_batch");
        ad[i] = std::fabs(x[i] - p.mu);
        const double zi = pp.c * ad[i];
        // Offsets at (or numerically at) mu are patched after the batch.
        z[i] = zi < 1e-280 ? 1.0 : zi;
        if (ad[i] == 0.0) ad[i] = 1.0;
    }
    std::vector<double> log_k(n);
    std::vector<double> log_ad(n);
    kernels::log_bessel_k_batch(pp.nu, z, log_k);
    kernels::log_batch(ad, log_ad);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - p.mu;
        if (pp.c * std::fabs(d) < 1e-280) {
            out[i] = pp.log_density_at_offset(d);
        } else {
            out[i] = pp.log_norm + pp.tilt * d + pp.nu * (log_ad[i] - pp.log_2s) + log_k[i];
        }
    }
}

double pdf_even_r(const VgParams& p, double x) {
    require_finite(x, "pdf_even_r");
    p.validate();
    if (!is_even_integer(p.r)) throw PreconditionError("pdf_even_r: r must be an even positive integer");
    const detail::Prepared pp(p);
    const double d = x - p.mu;
    const double ad = std::fabs(d);
    const int m = static_cast<int>(std::lround(0.5 * p.r)) - 1;
    const double a = pp.sigma2 / (2.0 * pp.s);
    // Horner in |d|: sum_j c_j a^j |d|^{m-j}
    std::vector<double> coef(m + 1);
    double cj = 1.0;
    double aj = 1.0;
    for (int j = 0; j <= m; ++j) {
        if (j > 0) {
            cj *= static_cast<double>((m + j) * (m - j + 1)) / j;
            aj *= a;
        }
        coef[j] = cj * aj;
    }
    double poly = coef[0];
    for (int j = 1; j <= m; ++j) poly = poly * ad + coef[j];
    const double log_pre = pp.tilt * d - pp.c * ad + log_tail_prefactor(pp);
    return std::exp(log_pre) * poly;
}

double pdf_asymptotic(const VgParams& p, double x, PdfRegime regime) {
    require_finite(x, "pdf_asymptotic");
    const detail::Prepared pp(p);
    const double ad = std::fabs(x - p.mu);
    switch (regime) {
        case PdfRegime::NearMu: {
            if (p.r > 1.0) return std::exp(pp.log_at_mu);
            if (p.r == 1.0) return -std::log(ad) / (std::numbers::pi * p.sigma);
            // Gamma((1-r)/2) / ((2 sigma)^r sqrt(pi) Gamma(r/2)) |d|^{r-1}
            const double lg = std::lgamma(0.5 * (1.0 - p.r)) - p.r * std::log(2.0 * p.sigma) -
                              0.5 * std::log(std::numbers::pi) - std::lgamma(0.5 * p.r);
            return std::exp(lg + (p.r - 1.0) * std::log(ad));
        }
        case PdfRegime::RightTail:
            return std::exp(log_tail_prefactor(pp) + (0.5 * p.r - 1.0) * std::log(ad) - pp.lambda_minus * ad);
        case PdfRegime::LeftTail:
            return std::exp(log_tail_prefactor(pp) + (0.5 * p.r - 1.0) * std::log(ad) - pp.lambda_plus * ad);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

// ---- distribution function -------------------------------------------------

double cdf(const VgParams& p, double x, CdfMethod method) {
    if (std::isnan(x)) throw DomainError("cdf: argument is NaN");
    const detail::Prepared pp(p);
    return cdf_prepared(pp, x, method);
}

double sf(const VgParams& p, double x) {
    if (std::isnan(x)) throw DomainError("sf: argument is NaN");
    const detail::Prepared pp(p);
    return sf_prepared(pp, x);
}

void cdf_sorted(const VgParams& p, std::span<const double> x, std::span<double> out) {
    if (x.size() != out.size()) throw PreconditionError("cdf_sorted: size mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) {
        require_finite(x[i], "cdf_sorted");
        if (i > 0 && x[i] < x[i - 1]) throw PreconditionError("cdf_sorted: input must be ascending");
    }
    if (x.empty()) return;
    const detail::Prepared pp(p);
    constexpr std::size_t kReanchor = 2000;
    using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
    std::size_t since_anchor = 0;
    out[0] = cdf_prepared(pp, x[0], CdfMethod::Auto);
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double a = x[i - 1] - p.mu;
        const double b = x[i] - p.mu;
        ++since_anchor;
        if (a == b) {
            out[i] = out[i - 1];
            continue;
        }
        // Segments touching or crossing mu can carry the singular peak.
        if (since_anchor >= kReanchor || (a < 0.0 && b >= 0.0) || a == 0.0) {
            out[i] = cdf_prepared(pp, x[i], CdfMethod::Auto);
            since_anchor = 0;
            continue;
        }
        // One 21-point rule per gap; gaps it cannot resolve are re-anchored.
        auto f = [&](double d) { return pp.density_at_offset(d); };
        double err = 0.0;
        const double inc = GK::integrate(f, a, b, 0, 0.0, &err);
        if (!(err <= 1e-14)) {
            out[i] = cdf_prepared(pp, x[i], CdfMethod::Auto);
            since_anchor = 0;
            continue;
        }
        out[i] = std::clamp(out[i - 1] + inc, out[i - 1], 1.0);
    }
}

SurvivalTail survival_tail(const VgParams& p, double x) {
    require_finite(x, "survival_tail");
    const detail::Prepared pp(p);
    if (p.theta < 0.0) throw PreconditionError("survival_tail: bound needs theta >= 0");
    if (!(x > p.mu)) throw PreconditionError("survival_tail: bound needs x > mu");
    const double d = x - p.mu;
    SurvivalTail out{};
    out.survival = sf_prepared(pp, x);
    out.asymptotic = std::exp(log_tail_prefactor(pp) - std::log(pp.lambda_minus) + (0.5 * p.r - 1.0) * std::log(d) -
                              pp.lambda_minus * d);
    out.bound = pp.density_at_offset(d) / pp.lambda_minus;
    out.bound_direction = p.r < 2.0 ? BoundDirection::Upper
                          : p.r == 2.0 ? BoundDirection::Equality
                                       : BoundDirection::Lower;
    return out;
}

double quantile(const VgParams& p, double q) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("quantile: q must lie in (0, 1)");
    const detail::Prepared pp(p);
    if (p.theta == 0.0 && q == 0.5) return p.mu;
    auto f = [&](double x) { return cdf_prepared(pp, x, CdfMethod::Auto) - q; };
    const double mean = p.mu + p.r * p.theta;
    const double sd = pp.stddev();
    double step = 8.0 * sd;
    double lo = mean - step;
    double hi = mean + step;
    double flo = f(lo);
    double fhi = f(hi);
    for (int i = 0; flo > 0.0 && i < 200; ++i) {
        hi = lo;
        fhi = flo;
        step *= 2.0;
        lo = mean - step;
        flo = f(lo);
    }
    for (int i = 0; fhi < 0.0 && i < 200; ++i) {
        lo = hi;
        flo = fhi;
        step *= 2.0;
        hi = mean + step;
        fhi = f(hi);
    }
    if (flo > 0.0 || fhi < 0.0) throw ConvergenceError("quantile: failed to bracket");
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    std::uintmax_t iters = 300;
    auto tol = [&](double a, double b) {
        return std::fabs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::fabs(a), std::fabs(b));
    };
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
    const double fa = std::fabs(f(a));
    const double fb = std::fabs(f(b));
    const double x = fa <= fb ? a : b;
    if (std::min(fa, fb) > 1e-9) throw ConvergenceError("quantile: residual above 1e-9");
    return x;
}

// ---- generating functions --------------------------------------------------

std::complex<double> characteristic_function(const VgParams& p, double t) {
    p.validate();
    require_finite(t, "characteristic_function");
    const std::complex<double> base(1.0 + p.sigma * p.sigma * t * t, -2.0 * p.theta * t);
    // Re(base) >= 1, so the principal logarithm is continuous in t.
    return std::exp(std::complex<double>(0.0, p.mu * t) - 0.5 * p.r * std::log(base));
}

double cgf(const VgParams& p, double t) {
    p.validate();
    require_finite(t, "cgf");
    const double lp = p.lambda_plus();
    const double lm = p.lambda_minus();
    if (!(t > -lp && t < lm)) throw DomainError("cgf: t outside (-lambda_plus, lambda_minus)");
    return p.mu * t - 0.5 * p.r * std::log1p(-t / lm) - 0.5 * p.r * std::log1p(t / lp);
}

double mgf(const VgParams& p, double t) { return std::exp(cgf(p, t)); }

GeneratingFunctions generating_functions(const VgParams& p, double t) {
    GeneratingFunctions g;
    g.cf = characteristic_function(p, t);
    if (t > -p.lambda_plus() && t < p.lambda_minus()) {
        g.cgf = cgf(p, t);
        g.mgf = std::exp(*g.cgf);
    }
    return g;
}

// ---- Stein residual, expectations, Levy density, closure ----------------------

namespace {

detail::QuadResult expectation_prepared(const detail::Prepared& pp, const std::function<double(double)>& f,
                                        double tol) {
    const double mu = pp.p.mu;
    auto right = [&](double u) {
        const double dens = pp.side_density(+1, u);
        return dens == 0.0 ? 0.0 : f(mu + u) * dens;
    };
    auto left = [&](double u) {
        const double dens = pp.side_density(-1, u);
        return dens == 0.0 ? 0.0 : f(mu - u) * dens;
    };
    const auto r = detail::integrate_side(pp, +1, 0.0, right, tol);
    const auto l = detail::integrate_side(pp, -1, 0.0, left, tol);
    return {r.value + l.value, r.error + l.error};
}

}  // namespace

double expectation(const VgParams& p, const std::function<double(double)>& f, double tol) {
    const detail::Prepared pp(p);
    return expectation_prepared(pp, f, tol).value;
}

double stein_residual(const VgParams& p, const TestFunction& g, double quad_tol) {
    if (!g.g || !g.dg || !g.d2g) throw PreconditionError("stein_residual: g, g' and g'' are all required");
    const detail::Prepared pp(p);
    const double s2 = pp.sigma2;
    auto h = [&](double w) {
        const double d = w - p.mu;
        return s2 * d * g.d2g(w) + (s2 * p.r + 2.0 * p.theta * d) * g.dg(w) + (p.r * p.theta - d) * g.g(w);
    };
    const auto res = expectation_prepared(pp, h, 1e-12);
    if (!std::isfinite(res.value) || res.error > quad_tol)
        throw ConvergenceError("stein_residual: quadrature error estimate exceeds tolerance");
    return res.value;
}

double levy_density(const VgParams& p, double x) {
    p.validate();
    require_finite(x, "levy_density");
    if (x == 0.0) throw DomainError("levy_density: undefined at 0");
    const double ax = std::fabs(x);
    const double rate = x < 0.0 ? p.lambda_plus() : p.lambda_minus();
    return p.r / (2.0 * ax) * std::exp(-rate * ax);
}

VgParams affine_transform(const VgParams& p, double a, double b) {
    p.validate();
    if (a == 0.0 || !std::isfinite(a) || !std::isfinite(b)) throw DomainError("affine_transform: need finite a != 0");
    return make_params(p.r, a * p.theta, std::fabs(a) * p.sigma, a * p.mu + b);
}

VgParams convolve(const VgParams& p1, const VgParams& p2) {
    p1.validate();
    p2.validate();
    if (p1.theta != p2.theta || p1.sigma != p2.sigma)
        throw PreconditionError("convolve: theta and sigma must match exactly");
    return make_params(p1.r + p2.r, p1.theta, p1.sigma, p1.mu + p2.mu);
}

}  // namespace vg
