#include "vg/sampling.hpp"

#include <cmath>
#include <limits>

#include "vg/error.hpp"
#include "vg/kernels.hpp"

namespace vg {

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_([&] {
          std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                            static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)};
          return std::mt19937_64(seq);
      }()) {}

std::uint64_t RngStream::bits() { return engine_(); }

double RngStream::uniform() {
    // 53 random bits at the midpoint of each cell: strictly inside (0, 1).
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() { return normal_(engine_); }

double RngStream::exponential() { return -std::log(uniform()); }

namespace {

void require_gamma_args(double shape, double rate) {
    if (!(shape > 0.0) || !std::isfinite(shape) || !(rate > 0.0) || !std::isfinite(rate))
        throw DomainError("sample_gamma: shape and rate must be positive and finite");
}

// log of a Gamma(a, 1) variate, a >= 1.
double log_gamma_variate_ge1(double a, RngStream& rng) {
    const double d = a - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double z = 0.0;
        double v = 0.0;
        do {
            z = rng.normal();
            v = 1.0 + c * z;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        const double z2 = z * z;
        if (u < 1.0 - 0.0331 * z2 * z2) return std::log(d * v);
        if (std::log(u) < 0.5 * z2 + d * (1.0 - v + std::log(v))) return std::log(d * v);
    }
}

double log_gamma_variate(double a, RngStream& rng) {
    if (a >= 1.0) return log_gamma_variate_ge1(a, rng);
    // G(a) = G(a+1) U^{1/a}
    const double lg = log_gamma_variate_ge1(a + 1.0, rng);
    return lg + std::log(rng.uniform()) / a;
}

bool is_integer(double r) { return r >= 1.0 && r == std::round(r); }
bool is_even_integer(double r) { return r >= 2.0 && r == 2.0 * std::round(0.5 * r); }

}  // namespace

double sample_gamma(double shape, double rate, RngStream& rng) {
    require_gamma_args(shape, rate);
    return std::exp(log_gamma_variate(shape, rng)) / rate;
}

std::vector<double> sample_gamma(double shape, double rate, RngStream& rng, std::size_t n) {
    require_gamma_args(shape, rate);
    std::vector<double> out(n);
    for (auto& v : out) v = std::exp(log_gamma_variate(shape, rng)) / rate;
    return out;
}

SampleBatch sample_vg_normal_gamma(const VgParams& p, RngStream& rng, std::size_t n) {
    p.validate();
    std::vector<double> s(n);
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = sample_gamma(0.5 * p.r, 0.5, rng);
        z[i] = rng.normal();
    }
    SampleBatch out{std::vector<double>(n), p, SampleMethod::NormalGamma};
    kernels::normal_variance_mean(p.mu, p.theta, p.sigma, s, z, out.values);
    return out;
}

SampleBatch sample_vg_gamma_difference(const VgParams& p, RngStream& rng, std::size_t n) {
    p.validate();
    const double a = 0.5 * p.r;
    const double rate_pos = p.lambda_minus();
    const double rate_neg = p.lambda_plus();
    SampleBatch out{std::vector<double>(n), p, SampleMethod::GammaDifference};
    for (std::size_t i = 0; i < n; ++i) {
        const double sp = sample_gamma(a, rate_pos, rng);
        const double sn = sample_gamma(a, rate_neg, rng);
        out.values[i] = p.mu + sp - sn;
    }
    return out;
}

SampleBatch sample_vg_integer_reps(const VgParams& p, RngStream& rng, std::size_t n, SampleMethod variant) {
    p.validate();
    SampleBatch out{std::vector<double>(n), p, variant};
    if (variant == SampleMethod::NormalProducts) {
        if (!is_integer(p.r)) throw PreconditionError("NormalProducts sampler needs integer r");
        const int r = static_cast<int>(p.r);
        for (std::size_t i = 0; i < n; ++i) {
            double sq = 0.0;
            double cross = 0.0;
            for (int k = 0; k < r; ++k) {
                const double x = rng.normal();
                const double y = rng.normal();
                sq += x * x;
                cross += x * y;
            }
            out.values[i] = p.mu + p.theta * sq + p.sigma * cross;
        }
        return out;
    }
    if (variant == SampleMethod::UniformLog) {
        if (!is_even_integer(p.r)) throw PreconditionError("UniformLog sampler needs even integer r");
        const int half = static_cast<int>(std::lround(0.5 * p.r));
        const double pos = p.scale_pos();
        const double neg = p.scale_neg();
        for (std::size_t i = 0; i < n; ++i) {
            double e1 = 0.0;
            double e2 = 0.0;
            for (int k = 0; k < half; ++k) e1 -= std::log(rng.uniform());
            for (int k = 0; k < half; ++k) e2 -= std::log(rng.uniform());
            out.values[i] = p.mu + pos * e1 - neg * e2;
        }
        return out;
    }
    throw PreconditionError("sample_vg_integer_reps: variant must be NormalProducts or UniformLog");
}

SampleBatch sample_vg(const VgParams& p, SampleMethod method, RngStream& rng, std::size_t n) {
    switch (method) {
        case SampleMethod::NormalGamma:
            return sample_vg_normal_gamma(p, rng, n);
        case SampleMethod::GammaDifference:
            return sample_vg_gamma_difference(p, rng, n);
        case SampleMethod::NormalProducts:
        case SampleMethod::UniformLog:
            return sample_vg_integer_reps(p, rng, n, method);
    }
    throw PreconditionError("sample_vg: unknown method");
}

SampleBatch selfdec_check_sample(const VgParams& p, double c, RngStream& rng, std::size_t n) {
    p.validate();
    if (!is_even_integer(p.r)) throw PreconditionError("selfdec_check_sample: r must be an even integer");
    if (!(c >= 0.0 && c <= 1.0)) throw PreconditionError("selfdec_check_sample: c must lie in [0, 1]");
    const int terms = static_cast<int>(std::lround(0.5 * p.r));
    const double lm = p.lambda_minus();
    const double k = p.sigma * p.sigma * lm * lm;
    const double p00 = c * c;
    const double p10 = (1.0 - c) * (c + (1.0 - c) / (1.0 + k));
    // P(delta1 = 0, delta2 = 1) is the remainder; (1, 1) has probability 0.
    SampleBatch base = sample_vg_normal_gamma(p, rng, n);
    SampleBatch out{std::vector<double>(n), p, SampleMethod::NormalGamma};
    for (std::size_t i = 0; i < n; ++i) {
        double v = c * base.values[i] + (1.0 - c) * p.mu;
        for (int t = 0; t < terms; ++t) {
            const double u = rng.uniform();
            const double w = rng.exponential();
            if (u < p00) continue;
            if (u < p00 + p10) {
                v += w / lm;  // sigma * (W1 / (sigma lambda_minus))
            } else {
                v -= p.sigma * p.sigma * lm * w;
            }
        }
        out.values[i] = v;
    }
    return out;
}

const char* method_name(SampleMethod m) noexcept {
    switch (m) {
        case SampleMethod::NormalGamma: return "normal-gamma";
        case SampleMethod::GammaDifference: return "gamma-difference";
        case SampleMethod::NormalProducts: return "normal-products";
        case SampleMethod::UniformLog: return "uniform-log";
    }
    return "unknown";
}

}  // namespace vg
