#pragma once

// Internal pieces of the K_nu evaluation shared by specfun.cpp and the
// kernel variants in src/kernels/.

#include "vg/specfun.hpp"

namespace vg::specfun::detail {

// Temme series for x <= kTemmeCutoff, Steed's continued fraction above.
inline constexpr double kTemmeCutoff = 2.0;

// log K_mu(x) and K_{mu+1}(x)/K_mu(x) for |mu| <= 1/2.
struct SeedPair {
    double log_k;
    double ratio;
};

// Order-only factors of the Temme series, shared by every argument of a batch.
struct TemmeOrder {
    double mu;
    double fact;  // pi mu / sin(pi mu)
    double gam1;
    double gam2;
    double gampl;  // 1 / Gamma(1 + mu)
    double gammi;  // 1 / Gamma(1 - mu)
};

TemmeOrder temme_order(double mu);
SeedPair temme_series(const TemmeOrder& order, double x);
SeedPair temme_series(double mu, double x);
SeedPair steed_cf2(double mu, double x);

// Carries a seed at order mu up by `steps` integer orders.
BesselKPair raise_order(SeedPair seed, double mu, int steps, double x);

// Full evaluation for nu >= -1/2.
BesselKPair log_k_pair_reduced(double nu, double x);

// Batch form of log_bessel_k_pair: the order split and Temme factors are
// computed once. Valid for any finite nu; x must be positive and finite.
class BatchOrder {
public:
    explicit BatchOrder(double nu);
    BesselKPair eval(double x) const;
    bool flip() const { return flip_; }
    int steps() const { return steps_; }
    double mu() const { return temme_.mu; }
    const TemmeOrder& temme() const { return temme_; }

private:
    bool flip_;
    int steps_;
    TemmeOrder temme_;
};

}  // namespace vg::specfun::detail
