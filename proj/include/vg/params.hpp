#pragma once

#include <variant>

namespace vg {

// Canonical VG(r, theta, sigma, mu) parameters.
struct VgParams {
    double r = 1.0;      // shape, > 0
    double theta = 0.0;  // skewness
    double sigma = 1.0;  // scale, > 0
    double mu = 0.0;     // location

    // Throws DomainError unless r > 0, sigma > 0 and all fields are finite.
    void validate() const;

    // sqrt(theta^2 + sigma^2)
    double root() const noexcept;
    // (root + theta) / sigma^2: decay rate of the left tail.
    double lambda_plus() const noexcept;
    // (root - theta) / sigma^2: decay rate of the right tail.
    double lambda_minus() const noexcept;
    // root + theta = 1 / lambda_minus, scale of the positive gamma component.
    double scale_pos() const noexcept;
    // root - theta = 1 / lambda_plus, scale of the negative gamma component.
    double scale_neg() const noexcept;

    bool operator==(const VgParams&) const = default;
};

// Validated constructor.
VgParams make_params(double r, double theta, double sigma, double mu);

// VG_2(alpha, theta0, sigma0, mu): r = 2 alpha, sigma^2 = sigma0^2 / (2 alpha), theta = theta0 / (2 alpha).
struct MadanSeneta2 {
    double alpha;
    double theta0;
    double sigma0;
    double mu;
};

// (lambda, alpha, beta, mu) with gamma^2 = alpha^2 - beta^2:
// r = 2 lambda, theta = beta / gamma^2, sigma = 1 / gamma.
struct BibbySorensen {
    double lambda;
    double alpha;
    double beta;
    double mu;
};

// (tau, sigma0, kappa, mu): r = 2 tau, theta = sigma0 (1/kappa - kappa) / 2^{3/2}, sigma^2 = sigma0^2 / 2.
struct KotzKP {
    double tau;
    double sigma0;
    double kappa;
    double mu;
};

using AltParams = std::variant<MadanSeneta2, BibbySorensen, KotzKP>;

// Throws DomainError when the source invariants fail.
VgParams convert_params(const AltParams& src);

MadanSeneta2 to_madan_seneta2(const VgParams& p);
BibbySorensen to_bibby_sorensen(const VgParams& p);
KotzKP to_kotz_kp(const VgParams& p);

}  // namespace vg
