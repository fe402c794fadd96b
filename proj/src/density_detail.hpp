#pragma once

// Shared internals of the distribution code: a parameter set with its
// derived constants cached, the density as a function of the offset
// d = x - mu, and one-sided integrals of the form int_a^inf h(u) du where
// u runs away from mu on a chosen side.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "vg/params.hpp"
#include "vg/specfun.hpp"

namespace vg::detail {

struct Prepared {
    VgParams p;
    double s;          // sqrt(theta^2 + sigma^2)
    double sigma2;
    double c;          // s / sigma^2, Bessel argument per unit offset
    double nu;         // (r - 1) / 2
    double tilt;       // theta / sigma^2
    double log_norm;   // -log(sigma sqrt(pi)) - lgamma(r/2)
    double log_2s;
    double lambda_plus;
    double lambda_minus;
    double log_at_mu;  // log p(mu) for r > 1, +inf otherwise

    explicit Prepared(const VgParams& params) : p(params) {
        p.validate();
        s = p.root();
        sigma2 = p.sigma * p.sigma;
        c = s / sigma2;
        nu = 0.5 * (p.r - 1.0);
        tilt = p.theta / sigma2;
        log_norm = -std::log(p.sigma * std::sqrt(std::numbers::pi)) - std::lgamma(0.5 * p.r);
        log_2s = std::log(2.0 * s);
        lambda_plus = p.lambda_plus();
        lambda_minus = p.lambda_minus();
        if (p.r > 1.0) {
            // (1 + theta^2/sigma^2)^{-(r-1)/2} Gamma((r-1)/2) / (2 sigma sqrt(pi) Gamma(r/2))
            log_at_mu = -nu * std::log1p((p.theta / p.sigma) * (p.theta / p.sigma)) + std::lgamma(nu) -
                        std::log(2.0 * p.sigma * std::sqrt(std::numbers::pi)) - std::lgamma(0.5 * p.r);
        } else {
            log_at_mu = std::numeric_limits<double>::infinity();
        }
    }

    double log_density_at_offset(double d) const {
        const double ad = std::fabs(d);
        const double z = c * ad;
        if (z < 1e-280) {
            if (p.r > 1.0) return log_at_mu + tilt * d;
            if (ad == 0.0) return std::numeric_limits<double>::infinity();
        }
        return log_norm + tilt * d + nu * (std::log(ad) - log_2s) +
               specfun::bessel_k(nu, z, specfun::EvalScale::Log);
    }

    double density_at_offset(double d) const { return std::exp(log_density_at_offset(d)); }

    // Density at mu + side * u, u >= 0.
    double side_density(int side, double u) const { return density_at_offset(side > 0 ? u : -u); }

    double stddev() const { return std::sqrt(p.r * (sigma2 + 2.0 * p.theta * p.theta)); }

    // Right side decays like exp(-lambda_minus u), left like exp(-lambda_plus u).
    double decay_length(int side) const { return side > 0 ? p.scale_pos() : p.scale_neg(); }
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

inline boost::math::quadrature::tanh_sinh<double>& tanh_sinh_rule() {
    thread_local boost::math::quadrature::tanh_sinh<double> rule;
    return rule;
}

inline boost::math::quadrature::exp_sinh<double>& exp_sinh_rule() {
    thread_local boost::math::quadrature::exp_sinh<double> rule;
    return rule;
}

// Breakpoints on one side of mu: the Bessel length scale, the tail decay
// length, and a ladder of standard deviations around the side's share of
// the mean offset. Everything past the last point is a pure exponential
// tail and goes to exp_sinh.
inline std::vector<double> side_breakpoints(const Prepared& pp, int side, double a) {
    const double sd = pp.stddev();
    const double center = std::max(0.0, side * pp.p.r * pp.p.theta);
    std::vector<double> pts{pp.sigma2 / pp.s, pp.decay_length(side)};
    for (int j = -6; j <= 10; ++j) {
        const double v = center + j * sd;
        if (v > 0.0) pts.push_back(v);
    }
    std::sort(pts.begin(), pts.end());
    std::vector<double> out{a};
    for (double v : pts) {
        if (v > out.back() * (1.0 + 1e-9) && v > a) out.push_back(v);
    }
    return out;
}

// int_a^inf h(u) du for a >= 0 and h integrable; h may have an integrable
// singularity at u = 0.
template <class H>
QuadResult integrate_side(const Prepared& pp, int side, double a, H&& h, double tol = 1e-13) {
    const std::vector<double> pts = side_breakpoints(pp, side, a);
    QuadResult res;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double err = 0.0;
        double l1 = 0.0;
        res.value += tanh_sinh_rule().integrate(h, pts[i], pts[i + 1], tol, &err, &l1);
        res.error += err;
    }
    double err = 0.0;
    double l1 = 0.0;
    const double start = pts.back();
    auto shifted = [&](double t) { return h(start + t); };
    res.value += exp_sinh_rule().integrate(shifted, 0.0, std::numeric_limits<double>::infinity(), tol, &err, &l1);
    res.error += err;
    return res;
}

}  // namespace vg::detail
