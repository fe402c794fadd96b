#include "vg/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "vg/error.hpp"

namespace vg {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive and finite");
}

// Running mean and variance (Welford).
struct Accumulator {
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    void add(double v) {
        ++n;
        const double d = v - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (v - mean);
    }
    MonteCarloCheck result() const {
        const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
        return {mean, std::sqrt(var / static_cast<double>(n))};
    }
};

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double omega(const VgProcessParams& pp) {
    pp.validate();
    const double arg = 1.0 - pp.theta * pp.nu - 0.5 * pp.sigma * pp.sigma * pp.nu;
    if (!(arg > 0.0))
        throw DomainError("omega: 1 - theta nu - sigma^2 nu / 2 must be positive (no martingale correction exists)");
    return std::log1p(-pp.theta * pp.nu - 0.5 * pp.sigma * pp.sigma * pp.nu) / pp.nu;
}

VgStockModel make_stock_model(double s0, double rate_or_drift, const VgProcessParams& pp, ModelKind kind) {
    require_positive(s0, "make_stock_model: s0");
    if (!std::isfinite(rate_or_drift)) throw DomainError("make_stock_model: rate must be finite");
    return VgStockModel{s0, rate_or_drift, pp, omega(pp), kind};
}

VgParams log_return_params(const VgStockModel& model) { return log_price_relative_params(model, 1.0); }

VgParams log_price_relative_params(const VgStockModel& model, double t) {
    VgParams p = increment_params(model.pp, t);
    p.mu = (model.rate_or_drift + model.omega) * t;
    return p;
}

void validate_pricing_inputs(const PricingInputs& inp) {
    if (inp.model.kind != ModelKind::RiskNeutral) throw PreconditionError("pricing: model must be risk neutral");
    require_positive(inp.model.s0, "pricing: s0");
    require_positive(inp.strike, "pricing: strike");
    require_positive(inp.maturity, "pricing: maturity");
    const double w = omega(inp.model.pp);
    if (std::fabs(w - inp.model.omega) > 1e-12 * std::max(1.0, std::fabs(w)))
        throw PreconditionError("pricing: model omega inconsistent with its process parameters");
}

double black_scholes_call(double s0, double strike, double rate, double sigma_bs, double t) {
    require_positive(s0, "black_scholes_call: s0");
    require_positive(strike, "black_scholes_call: strike");
    require_positive(t, "black_scholes_call: t");
    if (!std::isfinite(rate)) throw DomainError("black_scholes_call: rate must be finite");
    if (!(sigma_bs >= 0.0) || !std::isfinite(sigma_bs)) throw DomainError("black_scholes_call: sigma must be >= 0");
    const double disc_k = strike * std::exp(-rate * t);
    if (sigma_bs == 0.0) return std::max(s0 - disc_k, 0.0);
    const double vol = sigma_bs * std::sqrt(t);
    const double d1 = (std::log(s0 / strike) + (rate + 0.5 * sigma_bs * sigma_bs) * t) / vol;
    return s0 * normal_cdf(d1) - disc_k * normal_cdf(d1 - vol);
}

CallPrice call_gamma_quadrature(const PricingInputs& inp) {
    validate_pricing_inputs(inp);
    const VgStockModel& m = inp.model;
    const double t = inp.maturity;
    const double k = inp.strike;
    const double nu = m.pp.nu;
    const double sigma = m.pp.sigma;
    const double theta = m.pp.theta;
    const double a = t / nu;  // gamma shape; scale nu
    const double log_fwd = std::log(m.s0) + (m.rate_or_drift + m.omega) * t;
    const double log_k = std::log(k);
    const double log_norm = -std::lgamma(a) - a * std::log(nu);

    // E[max(S - K, 0) | g] f(g) with log S ~ N(log_fwd + theta g, sigma^2 g) and
    // log f(g) = log_dens. The density is folded into each exponent so that
    // overflow of the forward never meets underflow of the density.
    auto conditional = [&](double g, double log_dens) {
        const double sd = sigma * std::sqrt(g);
        const double loc = log_fwd + theta * g;
        if (!(sd > 1e-300)) return std::max(std::exp(loc + log_dens) - k * std::exp(log_dens), 0.0);
        const double d1 = (loc - log_k + sd * sd) / sd;
        return std::exp(loc + 0.5 * sd * sd + log_dens) * normal_cdf(d1) - k * std::exp(log_dens) * normal_cdf(d1 - sd);
    };
    // Log density centred at the mean: for large shapes the constant and the
    // two variable terms are each ~a, and cancelling them pointwise would leave
    // rounding noise of relative size a * eps in the integrand.
    const double mean = a * nu;
    const double log_at_mean = log_norm + (a - 1.0) * std::log(mean) - a;
    auto weighted = [&](double g) {
        if (!(g > 0.0)) return 0.0;
        const double rel = (g - mean) / mean;
        return conditional(g, log_at_mean + (a - 1.0) * std::log1p(rel) - a * rel);
    };
    // Near g = 0 the integrand carries g^{a-1} and sqrt(g) terms; the
    // uncentred form keeps full precision there.
    auto near_zero = [&](double g) {
        if (!(g > 0.0)) return 0.0;
        return conditional(g, log_norm + (a - 1.0) * std::log(g) - g / nu);
    };

    const double sd = nu * std::sqrt(a);
    std::vector<double> cuts;
    for (int j = -12; j <= 14; ++j) {
        const double c = mean + j * sd;
        if (c > 0.0) cuts.push_back(c);
    }
    for (int j = -6; j <= 6; ++j) cuts.push_back(nu * std::ldexp(1.0, j));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double total = 0.0;
    double err_total = 0.0;
    double err = 0.0;
    {
        // Endpoint singularities at 0 are handled by the double-exponential rule.
        static thread_local boost::math::quadrature::tanh_sinh<double> ts(12);
        const double first = cuts.front();
        total += ts.integrate(near_zero, 0.0, first, 1e-11, &err);
        err_total += err; 
    }
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        total += GK::integrate(weighted, cuts[i], cuts[i + 1], 15, 1e-11, &err);
        err_total += err;
    }
    total += GK::integrate(weighted, cuts.back(), std::numeric_limits<double>::infinity(), 15, 1e-11, &err);
    err_total += err;

    const double disc = std::exp(-m.rate_or_drift * t);
    CallPrice out{disc * total, disc * err_total};
    if (!(out.abs_error <= 1e-8 * m.s0) || !std::isfinite(out.price))
        throw ConvergenceError("call_gamma_quadrature: error estimate exceeds 1e-8 S0");
    // Rounding can push a deep in- or out-of-the-money price past the no-arbitrage bounds.
    out.price = std::clamp(out.price, std::max(m.s0 - k * disc, 0.0), m.s0);
    return out;
}

CallPrice call_cf_inversion(const PricingInputs& inp, double damping) {
    validate_pricing_inputs(inp);
    if (!(damping > 0.0) || !std::isfinite(damping)) throw PreconditionError("call_cf_inversion: damping must be > 0");
    const VgStockModel& m = inp.model;
    const double t = inp.maturity;
    const double nu = m.pp.nu;
    const double s2nu = m.pp.sigma * m.pp.sigma * nu;
    const double b = damping + 1.0;
    // MGF of X(t) at b exists iff 1 - theta nu b - sigma^2 nu b^2 / 2 > 0.
    const double strip = 1.0 - m.pp.theta * nu * b - 0.5 * s2nu * b * b;
    if (!(strip > 0.0)) throw PreconditionError("call_cf_inversion: damping + 1 lies outside the MGF strip");
    const double shift = std::log(m.s0) + (m.rate_or_drift + m.omega) * t;
    const double log_k = std::log(inp.strike);
    const double power = t / nu;
    const double a = damping;
    const double log_scale = -m.rate_or_drift * t - a * log_k - std::log(std::numbers::pi);

    auto integrand = [&](double u) {
        const std::complex<double> v(u, -b);
        const std::complex<double> base = 1.0 - std::complex<double>(0.0, m.pp.theta * nu) * v + 0.5 * s2nu * v * v;
        // log of e^{i v shift} base^{-t/nu} e^{-i u log K}; Re(base) >= strip > 0 keeps the log continuous.
        const std::complex<double> log_phi =
            std::complex<double>(0.0, 1.0) * v * shift - power * std::log(base) - std::complex<double>(0.0, u * log_k);
        const std::complex<double> denom(a * a + a - u * u, (2.0 * a + 1.0) * u);
        return (std::exp(log_phi + log_scale) / denom).real();
    };

    // base = (sigma^2 nu / 2)(v - i y1)(v - i y2) and denom = -(u - i a)(u - i(a + 1))
    // with real y1, y2, so |base| >= sigma^2 nu u^2 / 2, |denom| >= u^2 and the
    // non-oscillating factor H of the integrand obeys |H| <= M u^{-2p-2} and
    // |H'| <= (2p + 2) |H| / u. Beyond U the tail is at most 2 M U^{-2p-1} / (2p + 1)
    // absolutely, and at most 2 M U^{-2p-2} / |shift - log K| after one
    // integration by parts against the net oscillation.
    const double log_m = log_scale + b * shift - power * std::log(0.5 * s2nu);
    const double target = 1e-8 * m.s0;
    const double freq = std::fabs(shift - log_k);
    auto tail_bound = [&](double u) {
        const double absolute = 2.0 * std::exp(log_m - (2.0 * power + 1.0) * std::log(u)) / (2.0 * power + 1.0);
        if (!(freq > 0.0)) return absolute;
        return std::min(absolute, 2.0 * std::exp(log_m - (2.0 * power + 2.0) * std::log(u)) / freq);
    };
    double upper = std::max(64.0, 2.0 * std::sqrt(2.0 * (a * a + a)));
    while (tail_bound(upper) > 0.1 * target) {
        upper *= 2.0;
        if (upper > 1e12) throw ConvergenceError("call_cf_inversion: characteristic function decays too slowly");
    }
    const double tail = tail_bound(upper);

    // Geometric blocks, each cut so that a piece spans at most a few periods
    // of the net oscillation frequency |shift - log K|.
    const double max_width = freq > 0.0 ? 4.0 * 2.0 * std::numbers::pi / freq : upper;
    double total = 0.0;
    double err_total = 0.0;
    double lo = 0.0;
    double hi = 1.0;
    std::size_t pieces = 0;
    while (lo < upper) {
        hi = std::min(hi, upper);
        const auto sub = static_cast<std::size_t>(std::ceil((hi - lo) / max_width));
        pieces += sub;
        if (pieces > 4'000'000) throw ConvergenceError("call_cf_inversion: integration range too oscillatory");
        for (std::size_t j = 0; j < sub; ++j) {
            const double x0 = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(sub);
            const double x1 = j + 1 == sub ? hi : lo + (hi - lo) * static_cast<double>(j + 1) / static_cast<double>(sub);
            double err = 0.0;
            total += GK::integrate(integrand, x0, x1, 12, 1e-11, &err);
            err_total += err;
        }
        lo = hi;
        hi *= 2.0;
    }
    CallPrice out{total, err_total + tail};
    if (!(out.abs_error <= target) || !std::isfinite(out.price))
        throw ConvergenceError("call_cf_inversion: error estimate exceeds 1e-8 S0");
    return out;
}

PathGrid simulate_stock(const VgStockModel& model, std::span<const double> times, RngStream& rng) {
    PathGrid x = simulate_path_subordinator(model.pp, times, rng);
    PathGrid s;
    s.times = x.times;
    s.values.resize(x.values.size());
    const double drift = model.rate_or_drift + model.omega;
    for (std::size_t k = 0; k < x.values.size(); ++k) s.values[k] = model.s0 * std::exp(drift * x.times[k] + x.values[k]);
    s.increments.resize(x.increments.size());
    for (std::size_t k = 0; k < s.increments.size(); ++k) s.increments[k] = s.values[k + 1] - s.values[k];
    return s;
}

namespace {

// X(t) draws by the subordinator construction.
template <class F>
MonteCarloCheck terminal_mc(const VgStockModel& model, double t, std::size_t paths, RngStream& rng, F payoff) {
    require_positive(t, "monte carlo: t");
    if (paths < 2) throw PreconditionError("monte carlo: need at least two paths");
    const VgProcessParams& pp = model.pp;
    const double drift = (model.rate_or_drift + model.omega) * t;
    Accumulator acc;
    for (std::size_t i = 0; i < paths; ++i) {
        const double tau = sample_gamma(t / pp.nu, 1.0 / pp.nu, rng);
        const double x = pp.theta * tau + pp.sigma * std::sqrt(tau) * rng.normal();
        acc.add(payoff(model.s0 * std::exp(drift + x)));
    }
    return acc.result();
}

}  // namespace

MonteCarloCheck discounted_spot_mc(const VgStockModel& model, double t, std::size_t paths, RngStream& rng) {
    const double disc = std::exp(-model.rate_or_drift * t);
    return terminal_mc(model, t, paths, rng, [&](double s) { return disc * s; });
}

MonteCarloCheck call_mc(const PricingInputs& inp, std::size_t paths, RngStream& rng) {
    validate_pricing_inputs(inp);
    const double disc = std::exp(-inp.model.rate_or_drift * inp.maturity);
    return terminal_mc(inp.model, inp.maturity, paths, rng,
                       [&](double s) { return disc * std::max(s - inp.strike, 0.0); });
}

}  // namespace vg
