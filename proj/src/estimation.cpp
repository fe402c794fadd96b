#include "vg/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>

#include <boost/math/tools/minima.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "vg/distribution.hpp"
#include "vg/error.hpp"
#include "vg/kernels.hpp"

namespace vg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHuge = 1e300;

// ---- Nelder-Mead through GSL -------------------------------------------------

struct SimplexResult {
    std::vector<double> x;
    double f;
    std::size_t iterations;
    bool converged;
};

struct SimplexCtx {
    const std::function<double(const double*)>* fn;
};

double gsl_trampoline(const gsl_vector* v, void* params) {
    const auto* ctx = static_cast<const SimplexCtx*>(params);
    const double f = (*ctx->fn)(v->data);
    return std::isfinite(f) ? f : kHuge;
}

SimplexResult simplex_minimize(const std::function<double(const double*)>& fn, const std::vector<double>& x0,
                               const std::vector<double>& step, std::size_t max_iter, double size_tol) {
    const std::size_t dim = x0.size();
    SimplexCtx ctx{&fn};
    gsl_multimin_function f{&gsl_trampoline, dim, &ctx};
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(dim), &gsl_vector_free);
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> ss(gsl_vector_alloc(dim), &gsl_vector_free);
    for (std::size_t i = 0; i < dim; ++i) {
        gsl_vector_set(x.get(), i, x0[i]);
        gsl_vector_set(ss.get(), i, step[i]);
    }
    std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim), &gsl_multimin_fminimizer_free);
    gsl_multimin_fminimizer_set(s.get(), &f, x.get(), ss.get());
    SimplexResult out{x0, kInf, 0, false};
    for (std::size_t it = 0; it < max_iter; ++it) {
        out.iterations = it + 1;
        if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), size_tol) == GSL_SUCCESS) {
            out.converged = true;
            break;
        }
    }
    for (std::size_t i = 0; i < dim; ++i) out.x[i] = gsl_vector_get(s->x, i);
    out.f = s->fval;
    return out;
}

struct GslErrorsOff {
    gsl_error_handler_t* old = gsl_set_error_handler_off();
    ~GslErrorsOff() { gsl_set_error_handler(old); }
};

// Unconstrained coordinates (log r, theta, log sigma, mu).
VgParams from_coords(const double* u) {
    VgParams p;
    p.r = std::exp(u[0]);
    p.theta = u[1];
    p.sigma = std::exp(u[2]);
    p.mu = u[3];
    return p;
}

std::vector<double> to_coords(const VgParams& p) { return {std::log(p.r), p.theta, std::log(p.sigma), p.mu}; }

bool plausible(const VgParams& p) {
    return std::isfinite(p.r) && std::isfinite(p.sigma) && std::isfinite(p.theta) && std::isfinite(p.mu) &&
           p.r > 1e-6 && p.r < 1e6 && p.sigma > 1e-300;
}

double sample_mean(std::span<const double> x) { return kernels::sum(x) / static_cast<double>(x.size()); }

}  // namespace

// ---- data ----------------------------------------------------------------------

DataSet make_dataset(std::vector<double> observations, std::string provenance) {
    for (double v : observations)
        if (!std::isfinite(v)) throw DomainError("make_dataset: observations must be finite");
    if (observations.size() < 8) throw PreconditionError("make_dataset: need at least 8 observations");
    return DataSet{std::move(observations), std::move(provenance)};
}

// ---- likelihood -------------------------------------------------------------------

LikelihoodEval evaluate_likelihood(const DataSet& data, const VgParams& p) {
    p.validate();
    LikelihoodEval ev{0.0, false, 0};
    if (p.r <= 1.0) {
        for (std::size_t i = 0; i < data.observations.size(); ++i) {
            if (data.observations[i] == p.mu) {
                ev.nll = -kInf;
                ev.singular = true;
                ev.singular_index = i;
                return ev;
            }
        }
    }
    std::vector<double> lp(data.observations.size());
    log_pdf_batch(p, data.observations, lp);
    ev.nll = -kernels::sum(lp);
    return ev;
}

double negative_log_likelihood(const DataSet& data, const VgParams& p) { return evaluate_likelihood(data, p).nll; }

// ---- method of moments ------------------------------------------------------------

FitResult mom_symmetric(const DataSet& data) {
    const auto& x = data.observations;
    if (x.size() < 8) throw PreconditionError("mom_symmetric: need at least 8 observations");
    const double n = static_cast<double>(x.size());
    const double mean = sample_mean(x);
    const auto ps = kernels::power_sums(x, mean);
    const double var = ps.s2 / n;
    if (!(var > 0.0)) throw FitError("mom_symmetric: zero sample variance");
    const double nu = ps.s4 / (3.0 * var * var * n) - 1.0;
    if (!(nu > 0.0)) throw FitError("mom_symmetric: sample kurtosis <= 3, data lighter-tailed than any VG law");
    // VG_2(alpha = 1/nu, 0, sigma0, mu): r = 2/nu, sigma^2 = sigma0^2 nu / 2.
    FitResult out;
    out.method = FitMethod::MoM;
    out.params = make_params(2.0 / nu, 0.0, std::sqrt(var * nu / 2.0), mean);
    out.loglik = -negative_log_likelihood(data, out.params);
    out.iterations = 0;
    out.converged = true;
    return out;
}

FitResult mom_general(const DataSet& data, const VgParams& init) {
    init.validate();
    const auto& x = data.observations;
    if (x.size() < 8) throw PreconditionError("mom_general: need at least 8 observations");
    const double n = static_cast<double>(x.size());
    double m[5] = {1.0, 0.0, 0.0, 0.0, 0.0};
    const auto raw = kernels::power_sums(x, 0.0);
    m[1] = raw.s1 / n;
    m[2] = raw.s2 / n;
    m[3] = raw.s3 / n;
    m[4] = raw.s4 / n;
    const double sd = std::sqrt(std::max(m[2] - m[1] * m[1], 0.0));
    if (!(sd > 0.0)) throw FitError("mom_general: zero sample variance");
    double denom[5] = {1.0, 0.0, 0.0, 0.0, 0.0};
    for (int j = 1; j <= 4; ++j) {
        const double sdj = std::pow(sd, j);
        denom[j] = std::fabs(m[j]) < 1e-8 * sdj ? std::max(std::fabs(m[j]), sdj) : m[j];
    }
    std::function<double(const double*)> objective = [&](const double* u) {
        VgParams p = from_coords(u);
        if (!plausible(p)) return kHuge;
        VgParams c = p;
        c.mu = 0.0;
        const auto model = shift_raw_moments(raw_moments(c, 4), p.mu);
        double acc = 0.0;
        for (int j = 1; j <= 4; ++j) {
            const double t = (m[j] - model[j]) / denom[j];
            acc += t * t;
        }
        return acc;
    };
    GslErrorsOff guard;
    std::vector<double> u = to_coords(init);
    std::vector<double> step{0.2, 0.1 * sd, 0.2, 0.1 * sd};
    SimplexResult best{u, objective(u.data()), 0, false};
    std::size_t total = 0;
    for (int round = 0; round < 4; ++round) {
        auto res = simplex_minimize(objective, best.x, step, 5000, 1e-10);
        total += res.iterations;
        const bool improved = res.f < best.f * (1.0 - 1e-12);
        if (res.f <= best.f) best = res;
        if (!improved && round > 0) break;
        for (auto& v : step) v *= 0.3;
    }
    FitResult out;
    out.method = FitMethod::MoM;
    out.params = from_coords(best.x.data());
    out.params.validate();
    out.objective = best.f;
    out.iterations = total;
    out.converged = best.converged || best.f < 1e-20;
    out.loglik = -negative_log_likelihood(data, out.params);
    return out;
}

VgParams moment_start(const DataSet& data) {
    const auto& x = data.observations;
    if (x.size() < 8) throw PreconditionError("moment_start: need at least 8 observations");
    const double n = static_cast<double>(x.size());
    const double mean = sample_mean(x);
    const auto ps = kernels::power_sums(x, mean);
    const double var = ps.s2 / n;
    if (!(var > 0.0)) throw FitError("moment_start: zero sample variance");
    const double skew = ps.s3 / n / std::pow(var, 1.5);
    const double exkurt = std::max(ps.s4 / n / (var * var) - 3.0, 0.03);
    // With t = theta^2 / sigma^2: excess = 6(1+8t+8t^2) / (r (1+2t)^2) and
    // skew^2 = (2/3) excess g(t), g(t) = t(3+4t)^2 / ((1+8t+8t^2)(1+2t)),
    // where g increases from 0 to 1.
    auto g = [](double t) { return t * (3.0 + 4.0 * t) * (3.0 + 4.0 * t) / ((1.0 + 8.0 * t + 8.0 * t * t) * (1.0 + 2.0 * t)); };
    const double target = std::min(skew * skew / (2.0 / 3.0 * exkurt), 0.98);
    double lo = 0.0;
    double hi = 1.0;
    while (g(hi) < target && hi < 1e6) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < target ? lo : hi) = mid;
    }
    const double t = 0.5 * (lo + hi);
    const double r = std::clamp(6.0 * (1.0 + 8.0 * t + 8.0 * t * t) / (exkurt * (1.0 + 2.0 * t) * (1.0 + 2.0 * t)), 0.2, 200.0);
    const double sigma2 = var / (r * (1.0 + 2.0 * t));
    const double theta = std::copysign(std::sqrt(t * sigma2), skew);
    return make_params(r, theta, std::sqrt(sigma2), mean - r * theta);
}

FitResult mom_general(const DataSet& data) { return mom_general(data, moment_start(data)); }

namespace {

VgParams auto_init(const DataSet& data) { return moment_start(data); }

}  // namespace

// ---- maximum likelihood ---------------------------------------------------------------

FitResult mle_fit(const DataSet& data, std::optional<VgParams> init, const MleOptions& opt) {
    const auto& x = data.observations;
    if (x.size() < 8) throw PreconditionError("mle_fit: need at least 8 observations");
    const VgParams start = init ? *init : auto_init(data);
    start.validate();
    std::vector<double> sorted(x);
    std::sort(sorted.begin(), sorted.end());
    const double mean = sample_mean(x);
    const double sd = std::sqrt(kernels::power_sums(x, mean).s2 / static_cast<double>(x.size()));
    std::vector<double> lp(x.size());

    // Distance from mu to the nearest observation.
    auto nearest_gap = [&](double mu) {
        auto it = std::lower_bound(sorted.begin(), sorted.end(), mu);
        double gap = kInf;
        if (it != sorted.end()) gap = std::min(gap, *it - mu);
        if (it != sorted.begin()) gap = std::min(gap, mu - *(it - 1));
        return gap;
    };
    auto nll_params = [&](const VgParams& p) {
        if (!plausible(p)) return kHuge;
        // Unbounded likelihood at observations for r <= 1: such steps are rejected.
        if (p.r <= 1.0 && nearest_gap(p.mu) <= 1e-12 * std::max(1.0, std::fabs(p.mu))) return kHuge;
        log_pdf_batch(p, x, lp);
        const double v = -kernels::sum(lp);
        return std::isfinite(v) ? v : kHuge;
    };
    std::function<double(const double*)> objective = [&](const double* u) { return nll_params(from_coords(u)); };

    GslErrorsOff guard;
    std::vector<double> u = to_coords(start);
    double best = nll_params(start);
    std::vector<double> step{0.3, 0.2 * sd, 0.2, 0.1 * sd};
    std::size_t used = 0;
    bool converged = false;
    for (int round = 0; round <= opt.mu_refinements && used < opt.max_iterations; ++round) {
        const double before = best;
        auto res = simplex_minimize(objective, u, step, opt.max_iterations - used, 1e-7);
        used += res.iterations;
        if (res.f <= best) {
            u = res.x;
            best = res.f;
        }
        // Bracketed search in mu with the other coordinates fixed: the likelihood
        // has kinks (r <= 1: spikes) at the observations, where simplex steps stall.
        const double half_width = 0.05 * sd;
        auto fmu = [&](double m) {
            std::vector<double> v = u;
            v[3] = m;
            return objective(v.data());
        };
        const auto [mu_new, f_new] =
            boost::math::tools::brent_find_minima(fmu, u[3] - half_width, u[3] + half_width, 40);
        if (f_new < best) {
            u[3] = mu_new;
            best = f_new;
        }
        const double rel = std::fabs(before - best) / std::max(1.0, std::fabs(best));
        if (res.converged && rel < opt.rel_tol) {
            converged = true;
            break;
        }
        for (auto& v : step) v *= 0.5;
    }
    FitResult out;
    out.method = FitMethod::MLE;
    out.params = from_coords(u.data());
    out.params.validate();
    out.loglik = -best;
    out.iterations = used;
    out.converged = converged;
    out.singular = out.params.r <= 1.0 && nearest_gap(out.params.mu) <= 1e-8 * std::max(sd, 1e-300);
    if (out.singular) out.converged = false;
    return out;
}

// ---- ECM ------------------------------------------------------------------------------

VgParams ecm_state_params(const EcmState& st) {
    return convert_params(MadanSeneta2{st.alpha, st.theta0, st.sigma0, st.mu});
}

EcmState ecm_initial_state(const VgParams& p) {
    const MadanSeneta2 m = to_madan_seneta2(p);
    EcmState st;
    st.alpha = m.alpha;
    st.theta0 = m.theta0;
    st.sigma0 = m.sigma0;
    st.mu = m.mu;
    return st;
}

void ecm_e_step(const DataSet& data, EcmState& st, EStepParts parts, const EcmOptions& opt) {
    const auto& x = data.observations;
    const std::size_t n = x.size();
    if (!(st.alpha > 0.0) || !(st.sigma0 > 0.0)) throw PreconditionError("ecm_e_step: alpha and sigma0 must be positive");
    const double gamma = std::sqrt(2.0 * st.alpha + (st.theta0 / st.sigma0) * (st.theta0 / st.sigma0));
    const double delta_floor = opt.delta_reg / gamma;
    std::vector<double> delta(n);
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        delta[i] = std::max(std::fabs(x[i] - st.mu) / st.sigma0, delta_floor);
        z[i] = gamma * delta[i];
    }
    // One batch at order alpha - 3/2 yields rho = K_{a-1/2}/K_{a-3/2}; the
    // recurrence then gives K_{a+1/2}/K_{a-1/2} = (2a - 1)/z + 1/rho.
    std::vector<double> log_k_low(n);
    std::vector<double> rho(n);
    kernels::log_bessel_k_batch(st.alpha - 1.5, z, log_k_low, rho);
    st.s_hat.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double up = (2.0 * st.alpha - 1.0) / z[i] + 1.0 / rho[i];
        st.s_hat[i] = delta[i] / gamma * up;
    }
    if (parts == EStepParts::SAndInvS || parts == EStepParts::All) {
        st.inv_s_hat.resize(n);
        for (std::size_t i = 0; i < n; ++i) st.inv_s_hat[i] = gamma / delta[i] / rho[i];
    }
    if (parts == EStepParts::SAndLogS || parts == EStepParts::All) {
        const double h = opt.deriv_step;
        std::vector<double> log_k_plus(n);
        std::vector<double> log_k_minus(n);
        kernels::log_bessel_k_batch(st.alpha - 0.5 + h, z, log_k_plus);
        kernels::log_bessel_k_batch(st.alpha - 0.5 - h, z, log_k_minus);
        st.log_s_hat.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double log_k_mid = log_k_low[i] + std::log(rho[i]);
            const double dk_over_k = (std::exp(log_k_plus[i] - log_k_mid) - std::exp(log_k_minus[i] - log_k_mid)) / (2.0 * h);
            st.log_s_hat[i] = std::log(delta[i] / gamma) + dk_over_k;
        }
    }
}

void ecm_cm_step_location_scale(const DataSet& data, EcmState& st) {
    const auto& x = data.observations;
    const double n = static_cast<double>(x.size());
    if (st.s_hat.size() != x.size() || st.inv_s_hat.size() != x.size())
        throw PreconditionError("ecm_cm_step: E-step expectations missing");
    const double sum_x = kernels::sum(x);
    const double sum_s = kernels::sum(st.s_hat);
    const double sum_w = kernels::sum(st.inv_s_hat);
    const double sum_xw = kernels::dot(x, st.inv_s_hat);
    const double mu = (sum_xw * sum_s - n * sum_x) / (sum_w * sum_s - n * n);
    const double theta0 = (sum_x - n * mu) / sum_s;
    const double var = (kernels::weighted_sq_dev(x, st.inv_s_hat, mu) - theta0 * theta0 * sum_s) / n;
    if (!(var > 0.0) || !std::isfinite(mu)) throw FitError("ecm_cm_step: variance update collapsed");
    st.mu = mu;
    st.theta0 = theta0;
    st.sigma0 = std::sqrt(var);
}

namespace {

double loglik_alpha(const DataSet& data, const EcmState& st, double alpha) {
    EcmState trial = st;
    trial.alpha = alpha;
    const VgParams p = ecm_state_params(trial);
    const LikelihoodEval ev = evaluate_likelihood(data, p);
    if (ev.singular) return kInf;
    return std::isfinite(ev.nll) ? -ev.nll : -kInf;
}

}  // namespace

void ecm_cm_step_alpha(const DataSet& data, EcmState& st, const EcmOptions& opt) {
    const double current = loglik_alpha(data, st, st.alpha);
    auto neg = [&](double l) { return -loglik_alpha(data, st, std::exp(l)); };
    const double l_min = std::log(opt.alpha_min);
    const double l_max = std::log(opt.alpha_max);
    // alpha moves little between iterations: search a narrow window in log alpha
    // and widen it while the optimum sits on an interior edge.
    double la = std::log(st.alpha);
    double width = 0.05;
    double l_best = la;
    double f_best = -current;
    for (int attempt = 0; attempt < 6; ++attempt) {
        const double lo = std::max(l_min, la - width);
        const double hi = std::min(l_max, la + width);
        std::uintmax_t iters = 40;
        const auto [l, f] = boost::math::tools::brent_find_minima(neg, lo, hi, 20, iters);
        if (f < f_best) {
            l_best = l;
            f_best = f;
        }
        const double edge = 0.02 * width;
        const bool at_lo = l - lo < edge && lo > l_min;
        const bool at_hi = hi - l < edge && hi < l_max;
        if (!at_lo && !at_hi) break;
        la = l;
        width *= 4.0;
    }
    if (-f_best > current) {
        st.alpha = std::exp(l_best);
        st.loglik = -f_best;
    } else {
        st.loglik = current;
    }
}

void ecm_cm_step(const DataSet& data, EcmState& st, const EcmOptions& opt) {
    ecm_cm_step_location_scale(data, st);
    ecm_cm_step_alpha(data, st, opt);
}

void ecm_iteration(const DataSet& data, EcmState& st, const EcmOptions& opt) {
    ecm_e_step(data, st, EStepParts::SAndInvS, opt);
    ecm_cm_step_location_scale(data, st);
    ecm_e_step(data, st, EStepParts::SAndLogS, opt);
    ecm_cm_step_alpha(data, st, opt);
    ++st.iter;
}

FitResult ecm_fit(const DataSet& data, std::optional<VgParams> init, const EcmOptions& opt) {
    if (data.observations.size() < 8) throw PreconditionError("ecm_fit: need at least 8 observations");
    const VgParams start = init ? *init : auto_init(data);
    EcmState st = ecm_initial_state(start);
    st.loglik = -negative_log_likelihood(data, start);
    FitResult out;
    out.method = FitMethod::ECM;
    out.loglik_trace.push_back(st.loglik);
    double prev = st.loglik;
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
        ecm_iteration(data, st, opt);
        out.loglik_trace.push_back(st.loglik);
        const double rel = std::fabs(st.loglik - prev) / std::max(1.0, std::fabs(st.loglik));
        prev = st.loglik;
        if (rel < opt.rel_tol) {
            out.converged = true;
            break;
        }
    }
    out.params = ecm_state_params(st);
    out.loglik = st.loglik;
    out.iterations = st.iter;
    return out;
}

}  // namespace vg
