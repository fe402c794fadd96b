#include "vg/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "vg/error.hpp"
#include "bessel_detail.hpp"

namespace vg::specfun {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = 1e-16;
constexpr int kMaxIter = 100000;

// Taylor coefficients of 1/Gamma(z) about 0; index k multiplies z^k.
constexpr std::array<double, 31> kRecipGamma = {
    0.0,
    1.0,
    5.77215664901532866e-01,
    -6.55878071520253902e-01,
    -4.20026350340952370e-02,
    1.66538611382291479e-01,
    -4.21977345555443334e-02,
    -9.62197152787697303e-03,
    7.21894324666309990e-03,
    -1.16516759185906517e-03,
    -2.15241674114950975e-04,
    1.28050282388116196e-04,
    -2.01348547807882387e-05,
    -1.25049348214267063e-06,
    1.13302723198169593e-06,
    -2.05633841697760707e-07,
    6.11609510448141609e-09,
    5.00200764446922295e-09,
    -1.18127457048702004e-09,
    1.04342671169110054e-10,
    7.78226343990507081e-12,
    -3.69680561864220598e-12,
    5.10037028745447575e-13,
    -2.05832605356650664e-14,
    -5.34812253942301782e-15,
    1.22677862823826084e-15,
    -1.18125930169745883e-16,
    1.18669225475160037e-18,
    1.41238065531803186e-18,
    -2.29874568443537022e-19,
    1.71440632192733743e-20,
};

void require_positive_finite(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError(std::string(what) + ": argument must be positive and finite");
    }
}

// Temme's gamma combinations for |mu| <= 1/2:
//   gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu),  gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2.
struct TemmeGammas {
    double gam1, gam2, gampl, gammi;
};

TemmeGammas temme_gammas(double mu) {
    const double mu2 = mu * mu;
    double even = 0.0;
    double odd = 0.0;
    for (std::size_t k = kRecipGamma.size() - 1; k >= 1; --k) {
        if (k % 2 == 0) {
            even = even * mu2 + kRecipGamma[k];
        } else {
            odd = odd * mu2 + kRecipGamma[k];
        }
    }
    TemmeGammas g{};
    g.gam1 = -even;
    g.gam2 = odd;
    g.gampl = g.gam2 - mu * g.gam1;
    g.gammi = g.gam2 + mu * g.gam1;
    return g;
}

}  // namespace

namespace detail {

TemmeOrder temme_order(double mu) {
    const double pimu = kPi * mu;
    const TemmeGammas g = temme_gammas(mu);
    return {mu, std::fabs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu), g.gam1, g.gam2, g.gampl, g.gammi};
}

SeedPair temme_series(double mu, double x) { return temme_series(temme_order(mu), x); }

SeedPair temme_series(const TemmeOrder& g, double x) {
    const double mu = g.mu;
    const double x2 = 0.5 * x;
    const double fact = g.fact;
    double d = -std::log(x2);
    double e = mu * d;
    const double fact2 = std::fabs(e) < kEps ? 1.0 : std::sinh(e) / e;
    double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / g.gampl;
    double q = 0.5 / (e * g.gammi);
    double c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    const double mu2 = mu * mu;
    int i = 1;
    for (; i <= kMaxIter; ++i) {
        const double di = static_cast<double>(i);
        ff = (di * ff + p + q) / (di * di - mu2);
        c *= d / di;
        p /= di - mu;
        q /= di + mu;
        const double del = c * ff;
        sum += del;
        sum1 += c * (p - di * ff);
        if (std::fabs(del) < std::fabs(sum) * kEps) break;
    }
    if (i > kMaxIter) throw ConvergenceError("bessel_k: Temme series did not converge");
    // K_mu = sum, K_{mu+1} = sum1 * 2/x
    return {std::log(sum), sum1 / sum * (2.0 / x)};
}

SeedPair steed_cf2(double mu, double x) {
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25 - mu * mu;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    int i = 2;
    for (; i <= kMaxIter; ++i) {
        a -= 2.0 * (i - 1);
        c = -a * c / i;
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::fabs(dels / s) < kEps) break;
    }
    if (i > kMaxIter) throw ConvergenceError("bessel_k: continued fraction did not converge");
    h *= a1;
    const double log_kmu = 0.5 * std::log(kPi / (2.0 * x)) - x - std::log(s);
    return {log_kmu, (mu + x + 0.5 - h) / x};
}

BesselKPair raise_order(SeedPair seed, double mu, int steps, double x) {
    // Forward recurrence K_{v+1} = K_{v-1} + (2v/x) K_v carried on the ratio
    // R_v = K_{v+1}/K_v, which stays positive and never overflows.
    double log_k = seed.log_k;
    double ratio = seed.ratio;
    double product = 1.0;
    const double two_over_x = 2.0 / x;
    for (int k = 1; k <= steps; ++k) {
        const double next = product * ratio;
        if (next < 1e200) {
            product = next;
        } else {
            log_k += std::log(product) + std::log(ratio);
            product = 1.0;
        }
        ratio = (mu + k) * two_over_x + 1.0 / ratio;
    }
    log_k += std::log(product);
    return {log_k, ratio};
}

BesselKPair log_k_pair_reduced(double nu, double x) {
    // nu >= -1/2
    const int nl = static_cast<int>(std::floor(nu + 0.5));
    const double mu = nu - nl;
    const SeedPair seed = x <= kTemmeCutoff ? temme_series(mu, x) : steed_cf2(mu, x);
    return raise_order(seed, mu, nl, x);
}

BatchOrder::BatchOrder(double nu) : flip_(nu < -0.5), steps_(0), temme_{} {
    if (!std::isfinite(nu)) throw DomainError("bessel_k: order must be finite");
    const double nu_r = flip_ ? -nu - 1.0 : nu;
    steps_ = static_cast<int>(std::floor(nu_r + 0.5));
    temme_ = temme_order(nu_r - steps_);
}

BesselKPair BatchOrder::eval(double x) const {
    require_positive_finite(x, "bessel_k");
    const SeedPair seed = x <= kTemmeCutoff ? temme_series(temme_, x) : steed_cf2(temme_.mu, x);
    const BesselKPair p = raise_order(seed, temme_.mu, steps_, x);
    if (!flip_) return p;
    return {p.log_k + std::log(p.ratio), 1.0 / p.ratio};
}

}  // namespace detail

BesselKPair log_bessel_k_pair(double nu, double x) {
    require_positive_finite(x, "bessel_k");
    if (!std::isfinite(nu)) throw DomainError("bessel_k: order must be finite");
    if (nu >= -0.5) return detail::log_k_pair_reduced(nu, x);
    // K_nu = K_{-nu}: evaluate at nu' = -nu-1 >= -1/2, which yields K_{nu+1} and K_nu.
    const BesselKPair flipped = detail::log_k_pair_reduced(-nu - 1.0, x);
    return {flipped.log_k + std::log(flipped.ratio), 1.0 / flipped.ratio};
}

double bessel_k(double nu, double x, EvalScale scale) {
    require_positive_finite(x, "bessel_k");
    if (!std::isfinite(nu)) throw DomainError("bessel_k: order must be finite");
    const double log_k = detail::log_k_pair_reduced(std::fabs(nu), x).log_k;
    return scale == EvalScale::Log ? log_k : std::exp(log_k);
}

double bessel_k_half_integer(std::uint32_t m, double x) {
    require_positive_finite(x, "bessel_k_half_integer");
    // a_j = (m+j)! / ((m-j)! j!),  a_{j+1} = a_j (m+j+1)(m-j) / (j+1)
    double coeff = 1.0;
    double term_scale = 1.0;
    double sum = 1.0;
    const double inv_2x = 1.0 / (2.0 * x);
    for (std::uint32_t j = 0; j < m; ++j) {
        coeff *= static_cast<double>(m + j + 1) * static_cast<double>(m - j) / static_cast<double>(j + 1);
        term_scale *= inv_2x;
        sum += coeff * term_scale;
    }
    return std::sqrt(kPi / (2.0 * x)) * std::exp(-x) * sum;
}

double bessel_k_ratio(double nu, double x) {
    require_positive_finite(x, "bessel_k_ratio");
    if (!std::isfinite(nu)) throw DomainError("bessel_k_ratio: order must be finite");
    // The pair at order nu-1 carries K_nu / K_{nu-1}.
    return 1.0 / log_bessel_k_pair(nu - 1.0, x).ratio;
}

double bessel_k_order_derivative(double nu, double x, double h) {
    require_positive_finite(x, "bessel_k_order_derivative");
    if (!(h > 0.0) || h > 1e-3) throw DomainError("bessel_k_order_derivative: step must lie in (0, 1e-3]");
    return (bessel_k(nu + h, x) - bessel_k(nu - h, x)) / (2.0 * h);
}

double struve_l(double nu, double x) {
    require_positive_finite(x, "struve_l");
    if (!std::isfinite(nu)) throw DomainError("struve_l: order must be finite");
    // L_nu(x) = sum_k (x/2)^{2k+nu+1} / (Gamma(k+3/2) Gamma(k+nu+3/2))
    const double half_x = 0.5 * x;
    const double hx2 = half_x * half_x;
    double sum = 0.0;
    double term = 0.0;
    bool have_term = false;
    constexpr int kMaxTerms = 1000000;
    for (int k = 0; k < kMaxTerms; ++k) {
        const double b = k + nu + 1.5;
        if (!have_term) {
            // Start (or restart after a pole of Gamma(k+nu+3/2)) from the explicit term.
            if (b <= 0.0 && b == std::floor(b)) continue;
            const double a = k + 1.5;
            const double log_mag = (2.0 * k + nu + 1.0) * std::log(half_x) - std::lgamma(a) - std::lgamma(b);
            term = std::exp(log_mag) * (std::tgamma(b) < 0.0 ? -1.0 : 1.0);
            have_term = true;
        } else {
            term *= hx2 / ((k + 0.5) * (b - 1.0));
        }
        sum += term;
        if (k > 0 && std::fabs(term) <= 1e-14 * std::fabs(sum)) return sum;
    }
    throw ConvergenceError("struve_l: series exceeded 10^6 terms");
}

double upper_incomplete_gamma(double a, double x) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("upper_incomplete_gamma: a must be positive");
    if (!(x >= 0.0) || std::isnan(x)) throw DomainError("upper_incomplete_gamma: x must be nonnegative");
    if (std::isinf(x)) return 0.0;
    return boost::math::tgamma(a, x);
}

namespace {

// Plain hypergeometric series; terminates when a or b is a nonpositive integer.
double hyp2f1_series(double a, double b, double c, double z) {
    double term = 1.0;
    double sum = 1.0;
    constexpr int kMaxTerms = 1000000;
    for (int k = 0; k < kMaxTerms; ++k) {
        const double num = (a + k) * (b + k);
        if (num == 0.0) return sum;
        term *= num / ((c + k) * (k + 1.0)) * z;
        sum += term;
        if (std::fabs(term) <= 1e-17 * std::fabs(sum) && k > 2) return sum;
    }
    throw ConvergenceError("gauss_2f1: series did not converge");
}

bool is_nonpositive_integer(double v) { return v <= 0.0 && v == std::floor(v); }

}  // namespace

double gauss_2f1(double a, double b, double c, double z) {
    if (is_nonpositive_integer(c)) throw DomainError("gauss_2f1: c must not be a nonpositive integer");
    if (!(z >= 0.0) || !(z < 1.0)) throw DomainError("gauss_2f1: z must lie in [0, 1)");
    if (z == 0.0) return 1.0;
    if (is_nonpositive_integer(a) || is_nonpositive_integer(b) || z <= 0.5) {
        return hyp2f1_series(a, b, c, z);
    }
    const double ea = c - a;
    const double eb = c - b;
    const bool euler_terminates = is_nonpositive_integer(ea) || is_nonpositive_integer(eb);
    // Terms decay like z^k k^{a+b-c-1} directly and z^k k^{c-a-b-1} after the transformation.
    if (euler_terminates || (c - a - b) < (a + b - c)) {
        return std::pow(1.0 - z, c - a - b) * hyp2f1_series(ea, eb, c, z);
    }
    return hyp2f1_series(a, b, c, z);
}

double hyp_u_poly(std::uint32_t m, double b, double x) {
    if (!std::isfinite(b) || !std::isfinite(x)) throw DomainError("hyp_u_poly: non-finite input");
    double sum = 0.0;
    double binom = 1.0;
    double xpow = 1.0;
    for (std::uint32_t j = 0; j <= m; ++j) {
        double poch = 1.0;  // (b+j)_{m-j}
        for (std::uint32_t i = 0; i < m - j; ++i) poch *= b + j + i;
        sum += binom * poch * xpow;
        binom = binom * (m - j) / (j + 1.0);
        xpow *= -x;
    }
    return (m % 2 == 0) ? sum : -sum;
}

double log_gamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("log_gamma: argument must be positive");
    return boost::math::lgamma(x);
}

}  // namespace vg::specfun
