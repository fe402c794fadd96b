#include "vg/params.hpp"

#include <cmath>

#include "vg/error.hpp"

namespace vg {

void VgParams::validate() const {
    if (!std::isfinite(r) || !std::isfinite(theta) || !std::isfinite(sigma) || !std::isfinite(mu)) {
        throw DomainError("VgParams: all parameters must be finite");
    }
    if (!(r > 0.0)) throw DomainError("VgParams: r must be positive");
    if (!(sigma > 0.0)) throw DomainError("VgParams: sigma must be positive");
}

double VgParams::root() const noexcept { return std::hypot(theta, sigma); }

// root + theta and root - theta are formed so that neither suffers
// cancellation: their product is sigma^2.
double VgParams::scale_pos() const noexcept {
    const double s = root();
    return theta >= 0.0 ? s + theta : sigma * sigma / (s - theta);
}

double VgParams::scale_neg() const noexcept {
    const double s = root();
    return theta <= 0.0 ? s - theta : sigma * sigma / (s + theta);
}

double VgParams::lambda_plus() const noexcept { return 1.0 / scale_neg(); }

double VgParams::lambda_minus() const noexcept { return 1.0 / scale_pos(); }

VgParams make_params(double r, double theta, double sigma, double mu) {
    VgParams p{r, theta, sigma, mu};
    p.validate();
    return p;
}

namespace {

struct Converter {
    VgParams operator()(const MadanSeneta2& m) const {
        if (!(m.alpha > 0.0) || !(m.sigma0 > 0.0)) throw DomainError("MadanSeneta2: alpha and sigma0 must be positive");
        return make_params(2.0 * m.alpha, m.theta0 / (2.0 * m.alpha), m.sigma0 / std::sqrt(2.0 * m.alpha), m.mu);
    }
    VgParams operator()(const BibbySorensen& b) const {
        if (!(b.lambda > 0.0)) throw DomainError("BibbySorensen: lambda must be positive");
        if (!(b.alpha > std::fabs(b.beta))) throw DomainError("BibbySorensen: need alpha > |beta|");
        const double gamma2 = (b.alpha - b.beta) * (b.alpha + b.beta);
        return make_params(2.0 * b.lambda, b.beta / gamma2, 1.0 / std::sqrt(gamma2), b.mu);
    }
    VgParams operator()(const KotzKP& k) const {
        if (!(k.tau > 0.0) || !(k.sigma0 > 0.0) || !(k.kappa > 0.0)) {
            throw DomainError("KotzKP: tau, sigma0 and kappa must be positive");
        }
        const double theta = k.sigma0 * (1.0 / k.kappa - k.kappa) / (2.0 * std::sqrt(2.0));
        return make_params(2.0 * k.tau, theta, k.sigma0 / std::sqrt(2.0), k.mu);
    }
};

}  // namespace

VgParams convert_params(const AltParams& src) { return std::visit(Converter{}, src); }

MadanSeneta2 to_madan_seneta2(const VgParams& p) {
    p.validate();
    const double alpha = 0.5 * p.r;
    return {alpha, 2.0 * alpha * p.theta, p.sigma * std::sqrt(2.0 * alpha), p.mu};
}

BibbySorensen to_bibby_sorensen(const VgParams& p) {
    p.validate();
    const double gamma = 1.0 / p.sigma;
    const double beta = p.theta * gamma * gamma;
    return {0.5 * p.r, std::hypot(gamma, beta), beta, p.mu};
}

KotzKP to_kotz_kp(const VgParams& p) {
    p.validate();
    // kappa solves 1/kappa - kappa = 2 theta / sigma, i.e. kappa = (root - theta) / sigma.
    return {0.5 * p.r, p.sigma * std::sqrt(2.0), p.scale_neg() / p.sigma, p.mu};
}

}  // namespace vg
