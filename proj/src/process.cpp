#include "vg/process.hpp"

#include <cmath>

#include "vg/error.hpp"

namespace vg {

void VgProcessParams::validate() const {
    if (!std::isfinite(sigma) || !std::isfinite(nu) || !std::isfinite(theta))
        throw DomainError("VgProcessParams: fields must be finite");
    if (!(sigma > 0.0)) throw DomainError("VgProcessParams: sigma must be positive");
    if (!(nu > 0.0)) throw DomainError("VgProcessParams: nu must be positive");
}

GammaDifferenceDecomposition gamma_difference_decomposition(const VgProcessParams& pp) {
    pp.validate();
    const double root = std::sqrt(pp.theta * pp.theta + 2.0 * pp.sigma * pp.sigma / pp.nu);
    const double product = pp.sigma * pp.sigma / (2.0 * pp.nu);
    GammaDifferenceDecomposition g{};
    // The larger mean rate comes from the sum; the smaller from mu_p mu_n =
    // sigma^2 / (2 nu), which avoids cancellation in root - |theta|.
    if (pp.theta >= 0.0) {
        g.mu_p = 0.5 * (root + pp.theta);
        g.mu_n = product / g.mu_p;
    } else {
        g.mu_n = 0.5 * (root - pp.theta);
        g.mu_p = product / g.mu_n;
    }
    g.nu_p = g.mu_p * g.mu_p * pp.nu;
    g.nu_n = g.mu_n * g.mu_n * pp.nu;
    return g;
}

VgParams increment_params(const VgProcessParams& pp, double h) {
    pp.validate();
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("increment_params: h must be positive and finite");
    return make_params(2.0 * h / pp.nu, 0.5 * pp.theta * pp.nu, pp.sigma * std::sqrt(0.5 * pp.nu), 0.0);
}

void validate_grid(std::span<const double> times) {
    if (times.size() < 2) throw PreconditionError("path grid: need at least two time points");
    if (times[0] != 0.0) throw PreconditionError("path grid: first time must be 0");
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (!std::isfinite(times[k]) || !(times[k] > times[k - 1]))
            throw PreconditionError("path grid: times must be finite and strictly increasing");
    }
}

std::vector<double> uniform_grid(double t, std::size_t steps) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("uniform_grid: t must be positive and finite");
    if (steps == 0) throw DomainError("uniform_grid: need at least one step");
    std::vector<double> times(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) times[k] = t * static_cast<double>(k) / static_cast<double>(steps);
    times[steps] = t;
    return times;
}

namespace {

PathGrid from_increments(std::span<const double> times, std::vector<double> increments) {
    PathGrid path;
    path.times.assign(times.begin(), times.end());
    path.values.resize(times.size());
    path.values[0] = 0.0;
    for (std::size_t k = 0; k < increments.size(); ++k) path.values[k + 1] = path.values[k] + increments[k];
    path.increments = std::move(increments);
    return path;
}

}  // namespace

PathGrid simulate_path_subordinator(const VgProcessParams& pp, std::span<const double> times, RngStream& rng) {
    pp.validate();
    validate_grid(times);
    std::vector<double> inc(times.size() - 1);
    for (std::size_t k = 0; k < inc.size(); ++k) {
        const double h = times[k + 1] - times[k];
        const double tau = sample_gamma(h / pp.nu, 1.0 / pp.nu, rng);
        inc[k] = pp.theta * tau + pp.sigma * std::sqrt(tau) * rng.normal();
    }
    return from_increments(times, std::move(inc));
}

PathGrid simulate_path_gamma_difference(const VgProcessParams& pp, std::span<const double> times, RngStream& rng,
                                        GammaComponents* components) {
    validate_grid(times);
    const GammaDifferenceDecomposition g = gamma_difference_decomposition(pp);
    const std::size_t steps = times.size() - 1;
    std::vector<double> inc(steps);
    if (components != nullptr) {
        components->gamma_p.assign(times.size(), 0.0);
        components->gamma_n.assign(times.size(), 0.0);
    }
    // gamma(h; m, v) ~ Gamma(m^2 h / v, m / v) = Gamma(h / nu, 1 / (m nu)) since v = m^2 nu.
    for (std::size_t k = 0; k < steps; ++k) {
        const double h = times[k + 1] - times[k];
        const double up = sample_gamma(g.mu_p * g.mu_p * h / g.nu_p, g.mu_p / g.nu_p, rng);
        const double down = sample_gamma(g.mu_n * g.mu_n * h / g.nu_n, g.mu_n / g.nu_n, rng);
        inc[k] = up - down;
        if (components != nullptr) {
            components->gamma_p[k + 1] = components->gamma_p[k] + up;
            components->gamma_n[k + 1] = components->gamma_n[k] + down;
        }
    }
    return from_increments(times, std::move(inc));
}

ProcessMoments process_moments(const VgProcessParams& pp, double t) {
    pp.validate();
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("process_moments: t must be positive and finite");
    const double th = pp.theta;
    const double nu = pp.nu;
    const double s2 = pp.sigma * pp.sigma;
    const double th2 = th * th;
    ProcessMoments m{};
    m.mean = th * t;
    m.variance = (th2 * nu + s2) * t;
    m.central3 = (2.0 * th2 * th * nu * nu + 3.0 * s2 * th * nu) * t;
    m.central4 = (3.0 * s2 * s2 * nu + 12.0 * s2 * th2 * nu * nu + 6.0 * th2 * th2 * nu * nu * nu) * t +
                 (3.0 * s2 * s2 + 6.0 * s2 * th2 * nu + 3.0 * th2 * th2 * nu * nu) * t * t;
    return m;
}

std::complex<double> process_cf(const VgProcessParams& pp, double t, double u) {
    pp.validate();
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("process_cf: t must be positive and finite");
    if (!std::isfinite(u)) throw DomainError("process_cf: u must be finite");
    // The base has real part >= 1, so the principal log is continuous in u.
    const std::complex<double> base(1.0 + 0.5 * pp.sigma * pp.sigma * pp.nu * u * u, -pp.theta * pp.nu * u);
    return std::exp(-(t / pp.nu) * std::log(base));
}

double process_levy_density(const VgProcessParams& pp, double x) {
    const GammaDifferenceDecomposition g = gamma_difference_decomposition(pp);
    if (!std::isfinite(x)) throw DomainError("process_levy_density: x must be finite");
    if (x == 0.0) throw DomainError("process_levy_density: undefined at x = 0");
    const double ax = std::fabs(x);
    if (x > 0.0) return g.mu_p * g.mu_p / (g.nu_p * ax) * std::exp(-g.mu_p * ax / g.nu_p);
    return g.mu_n * g.mu_n / (g.nu_n * ax) * std::exp(-g.mu_n * ax / g.nu_n);
}

ProcessCfLevy process_cf_levy(const VgProcessParams& pp, double t, double u, double x) {
    return {process_cf(pp, t, u), process_levy_density(pp, x)};
}

}  // namespace vg
