#pragma once

// Random variates for VG laws through the normal-gamma mixture, the
// gamma difference, sums of normal products (integer r), sums of
// exponentials (even r), and the self-decomposability construction.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "vg/params.hpp"

namespace vg {

// Single-owner random stream. Same (seed, stream_id) gives the same
// sequence on a given build; distinct stream ids give independent streams.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

    double uniform();      // in (0, 1), never 0 or 1
    double normal();       // N(0, 1)
    double exponential();  // Exp(1)
    std::uint64_t bits();

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

// Gamma(shape, rate) with density rate^a x^{a-1} e^{-rate x} / Gamma(a).
// Marsaglia-Tsang squeeze for shape >= 1; for shape < 1 a Gamma(shape+1)
// draw is boosted by U^{1/shape} in log space. Throws DomainError unless
// shape, rate > 0 and finite.
double sample_gamma(double shape, double rate, RngStream& rng);
std::vector<double> sample_gamma(double shape, double rate, RngStream& rng, std::size_t n);

enum class SampleMethod { NormalGamma, GammaDifference, NormalProducts, UniformLog };

struct SampleBatch {
    std::vector<double> values;
    VgParams params;
    SampleMethod method;
};

// mu + theta S + sigma sqrt(S) T, S ~ Gamma(r/2, 1/2), T ~ N(0, 1).
SampleBatch sample_vg_normal_gamma(const VgParams& p, RngStream& rng, std::size_t n);

// mu + S - S', S ~ Gamma(r/2, lambda_minus), S' ~ Gamma(r/2, lambda_plus).
SampleBatch sample_vg_gamma_difference(const VgParams& p, RngStream& rng, std::size_t n);

// NormalProducts: mu + theta sum X_i^2 + sigma sum X_i Y_i over r pairs (integer r).
// UniformLog: mu + (s + theta) sum E_j - (s - theta) sum E'_j with r/2 Exp(1)
// terms each, E = -log U (even integer r). Throws PreconditionError otherwise.
SampleBatch sample_vg_integer_reps(const VgParams& p, RngStream& rng, std::size_t n, SampleMethod variant);

// Dispatch on method.
SampleBatch sample_vg(const VgParams& p, SampleMethod method, RngStream& rng, std::size_t n);

// c X + (1 - c) mu + V_1 + ... + V_{r/2}, X ~ VG(p) drawn by the normal-gamma
// sampler and V_i i.i.d. two-sided exponential mixtures. The output has the
// VG(p) law. Requires even integer r and 0 <= c <= 1 (PreconditionError).
SampleBatch selfdec_check_sample(const VgParams& p, double c, RngStream& rng, std::size_t n);

const char* method_name(SampleMethod m) noexcept;

}  // namespace vg
