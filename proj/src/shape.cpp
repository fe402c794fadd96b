#include <cmath>
#include <numbers>
#include <sstream>

#include "vg/distribution.hpp"
#include "vg/error.hpp"
#include "vg/log.hpp"

namespace vg {

namespace {

// Mode bracket for theta > 0, r > 2, as offsets from mu.
struct Bracket {
    double lower;
    double upper;
};

Bracket mode_bracket_positive(double r, double theta, double sigma) {
    Bracket b{theta * std::max(0.0, r - 3.0), theta * (r - 2.0)};
    if (r > 4.0) {
        const double s2 = theta * theta + sigma * sigma;
        const double inner = (theta * theta * (r - 2.0) * (r - 2.0) + sigma * sigma * (r - 4.0) * (r - 4.0)) / s2;
        b.lower = std::max(b.lower, 0.5 * theta * (r - 2.0 + std::sqrt(inner)));
    }
    return b;
}

// Offset of the mode for |theta| > 0, r > 2 by bisection on
// K_{(r-3)/2}(c x) / K_{(r-1)/2}(c x) = |theta| / s; the ratio increases in x.
double mode_offset_root(double r, double abs_theta, double sigma) {
    const double s = std::hypot(abs_theta, sigma);
    const double c = s / (sigma * sigma);
    const double target = abs_theta / s;
    const double nu = 0.5 * (r - 1.0);
    auto f = [&](double x) { return specfun::bessel_k_ratio(nu, c * x) - target; };
    const Bracket br = mode_bracket_positive(r, abs_theta, sigma);
    double lo = br.lower > 0.0 ? br.lower : br.upper * 1e-12;
    double hi = br.upper;
    // The bracket inequalities are strict; widen slightly against rounding.
    lo *= 1.0 - 1e-12;
    hi *= 1.0 + 1e-12;
    if (f(lo) > 0.0) lo = 0.0;
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (mid == 0.0 || f(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double closed_form_r4(double abs_theta, double sigma) {
    const double kappa = (sigma / abs_theta) * (sigma / abs_theta);
    return abs_theta * (1.0 + 1.0 / std::sqrt(1.0 + kappa));
}

double closed_form_r6(double abs_theta, double sigma) {
    const double kappa = (sigma / abs_theta) * (sigma / abs_theta);
    const double q = std::sqrt(1.0 + kappa);
    return 0.5 * abs_theta * (1.0 + 1.0 / q) * (3.0 - q + std::sqrt(6.0 * q + kappa - 2.0));
}

}  // namespace

ModeResult mode(const VgParams& p) {
    p.validate();
    if (p.r <= 2.0 || p.theta == 0.0) return mode(p, ModeMethod::AtMu);
    if (p.r == 4.0) return mode(p, ModeMethod::ClosedFormR4);
    if (p.r == 6.0) return mode(p, ModeMethod::ClosedFormR6);
    return mode(p, ModeMethod::RootFind);
}

ModeResult mode(const VgParams& p, ModeMethod method) {
    p.validate();
    ModeResult out{p.mu, method, p.mu, p.mu};
    if (method == ModeMethod::AtMu) {
        if (!(p.r <= 2.0 || p.theta == 0.0)) throw PreconditionError("mode: AtMu needs r <= 2 or theta == 0");
        return out;
    }
    if (p.theta == 0.0 || p.r <= 2.0) throw PreconditionError("mode: method needs r > 2 and theta != 0");
    const double sign = p.theta > 0.0 ? 1.0 : -1.0;
    const double at = std::fabs(p.theta);
    double offset = 0.0;
    switch (method) {
        case ModeMethod::ClosedFormR4:
            if (p.r != 4.0) throw PreconditionError("mode: ClosedFormR4 needs r == 4");
            offset = closed_form_r4(at, p.sigma);
            break;
        case ModeMethod::ClosedFormR6:
            if (p.r != 6.0) throw PreconditionError("mode: ClosedFormR6 needs r == 6");
            offset = closed_form_r6(at, p.sigma);
            break;
        case ModeMethod::RootFind:
            offset = mode_offset_root(p.r, at, p.sigma);
            break;
        case ModeMethod::AtMu:
            break;
    }
    const Bracket br = mode_bracket_positive(p.r, at, p.sigma);
    out.mode = p.mu + sign * offset;
    if (sign > 0.0) {
        out.lower = p.mu + br.lower;
        out.upper = p.mu + br.upper;
    } else {
        out.lower = p.mu - br.upper;
        out.upper = p.mu - br.lower;
    }
    return out;
}

MedianConjectureCheck check_median_conjecture(const VgParams& p, double med) {
    p.validate();
    MedianConjectureCheck c{};
    c.applicable = p.theta > 0.0;
    if (!c.applicable) {
        c.lower_ok = c.middle_ok = c.chain_ok = c.r2_bound_ok = true;
        return c;
    }
    const double r = p.r;
    const double t = p.theta;
    const double mid = r * t * std::exp(-2.0 / (3.0 * r));
    c.lower_ok = p.mu + (r - 1.0) * t < med;
    c.middle_ok = med < p.mu + mid;
    c.chain_ok = mid < (r - 2.0 / 3.0 + 2.0 / (9.0 * r)) * t;
    c.r2_bound_ok = r < 2.0 || med <= p.mu + (r + 2.0 * std::numbers::ln2 - 2.0) * t;
    return c;
}

double median(const VgParams& p) {
    p.validate();
    double med = 0.0;
    if (p.theta == 0.0) {
        med = p.mu;
    } else if (p.r == 2.0) {
        const double at = std::fabs(p.theta);
        const double s = p.root();
        med = p.mu + (p.theta > 0.0 ? 1.0 : -1.0) * (at + s) * std::log1p(at / s);
    } else {
        med = quantile(p, 0.5);
    }
    const auto check = check_median_conjecture(p, med);
    if (!check.holds()) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "median conjecture bound violated for VG(" << p.r << ", " << p.theta << ", " << p.sigma << ", "
            << p.mu << "): median " << med << " [lower " << check.lower_ok << ", middle " << check.middle_ok
            << ", chain " << check.chain_ok << ", r>=2 " << check.r2_bound_ok << "]";
        log_finding(msg.str());
    }
    return med;
}

}  // namespace vg
