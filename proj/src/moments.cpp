#include <cmath>
#include <numbers>
#include <vector>

#include "vg/distribution.hpp"
#include "vg/error.hpp"

namespace vg {

namespace {

void require_zero_location(const VgParams& p, const char* what) {
    p.validate();
    if (p.mu != 0.0) throw PreconditionError(std::string(what) + ": requires mu == 0 (shift afterwards)");
}

// Exact in double for the orders used here.
std::vector<double> binomial_row(std::size_t n) {
    std::vector<double> row(n + 1, 1.0);
    for (std::size_t k = 1; k < n; ++k) row[k] = row[k - 1] * static_cast<double>(n - k + 1) / static_cast<double>(k);
    return row;
}

}  // namespace

std::vector<double> raw_moments(const VgParams& p, std::size_t k) {
    require_zero_location(p, "raw_moments");
    std::vector<double> m(k + 1, 0.0);
    m[0] = 1.0;
    if (k == 0) return m;
    m[1] = p.r * p.theta;
    const double s2 = p.sigma * p.sigma;
    for (std::size_t j = 1; j < k; ++j) {
        const double jj = static_cast<double>(j);
        m[j + 1] = p.theta * (2.0 * jj + p.r) * m[j] + s2 * jj * (p.r + jj - 1.0) * m[j - 1];
    }
    return m;
}

std::vector<double> raw_moments_closed_form(const VgParams& p, std::size_t k) {
    require_zero_location(p, "raw_moments_closed_form");
    std::vector<double> out(k + 1, 0.0);
    out[0] = 1.0;
    const double s = p.root();
    const double z = (p.theta / s) * (p.theta / s);
    const double log_sigma = std::log(p.sigma);
    const double log_s = std::log(s);
    for (std::size_t kk = 1; kk <= k; ++kk) {
        const int m = static_cast<int>(kk % 2);
        if (m == 1 && p.theta == 0.0) continue;
        const double ell = std::ceil(0.5 * static_cast<double>(kk)) + 0.5;
        const double a2 = 0.5 * (p.r - 1.0) + ell;
        const double hyp = specfun::gauss_2f1(ell, a2, 0.5 + m, z);
        // 2^{k+m} theta^m sigma^{r+2k} Gamma(a2) Gamma(ell) / (sqrt(pi) s^{r+k+m} Gamma(r/2))
        const double log_mag = (kk + m) * std::numbers::ln2 + (m == 1 ? std::log(std::fabs(p.theta)) : 0.0) +
                               (p.r + 2.0 * kk) * log_sigma - (p.r + kk + m) * log_s + std::lgamma(a2) +
                               std::lgamma(ell) - 0.5 * std::log(std::numbers::pi) - std::lgamma(0.5 * p.r);
        const double sign = (m == 1 && p.theta < 0.0) ? -1.0 : 1.0;
        out[kk] = sign * std::exp(log_mag) * hyp;
    }
    return out;
}

std::vector<double> shift_raw_moments(std::span<const double> raw, double mu) {
    std::vector<double> out(raw.size(), 0.0);
    for (std::size_t k = 0; k < raw.size(); ++k) {
        const auto c = binomial_row(k);
        double acc = 0.0;
        double mu_pow = 1.0;
        // E[(Y+mu)^k] = sum_j C(k,j) mu^j E[Y^{k-j}]
        for (std::size_t j = 0; j <= k; ++j) {
            acc += c[j] * mu_pow * raw[k - j];
            mu_pow *= mu;
        }
        out[k] = acc;
    }
    return out;
}

double absolute_moment(const VgParams& p, double k) {
    require_zero_location(p, "absolute_moment");
    if (!std::isfinite(k)) throw DomainError("absolute_moment: order must be finite");
    const double k_star = std::max(-1.0, -p.r);
    if (!(k > k_star)) throw DomainError("absolute_moment: order must exceed max(-1, -r)");
    const double s = p.root();
    const double z = (p.theta / s) * (p.theta / s);
    const double hyp = specfun::gauss_2f1(0.5 * (k + 1.0), 0.5 * (p.r + k), 0.5, z);
    const double log_mag = k * std::numbers::ln2 + (p.r + 2.0 * k) * std::log(p.sigma) - (p.r + k) * std::log(s) +
                           std::lgamma(0.5 * (p.r + k)) + std::lgamma(0.5 * (k + 1.0)) -
                           0.5 * std::log(std::numbers::pi) - std::lgamma(0.5 * p.r);
    return std::exp(log_mag) * hyp;
}

std::vector<double> central_moments(const VgParams& p, std::size_t k) {
    p.validate();
    std::vector<double> m(k + 1, 0.0);
    m[0] = 1.0;
    const double s2 = p.sigma * p.sigma;
    const double t2 = p.theta * p.theta;
    if (k >= 2) m[2] = p.r * (s2 + 2.0 * t2);
    for (std::size_t j = 2; j < k; ++j) {
        const double jj = static_cast<double>(j);
        m[j + 1] = 2.0 * jj * p.theta * m[j] + jj * (s2 * (p.r + jj - 1.0) + 2.0 * t2 * p.r) * m[j - 1] +
                   jj * (jj - 1.0) * p.r * p.theta * s2 * m[j - 2];
    }
    return m;
}

std::vector<double> central_moments_u(const VgParams& p, std::size_t k) {
    p.validate();
    // Y - EY = (s+theta)(G1 - r/2) - (s-theta)(G2 - r/2), G1, G2 ~ Gamma(r/2, 1);
    // E[(G - a)^j] = U(-j, 1-j-a, -a).
    const double a = 0.5 * p.r;
    const double pos = p.scale_pos();
    const double neg = p.scale_neg();
    std::vector<double> gamma_central(k + 1);
    for (std::size_t j = 0; j <= k; ++j)
        gamma_central[j] = specfun::hyp_u_poly(static_cast<std::uint32_t>(j), 1.0 - static_cast<double>(j) - a, -a);
    std::vector<double> out(k + 1, 0.0);
    out[0] = 1.0;
    for (std::size_t kk = 1; kk <= k; ++kk) {
        const auto c = binomial_row(kk);
        double acc = 0.0;
        for (std::size_t j = 0; j <= kk; ++j) {
            acc += c[j] * std::pow(-neg, static_cast<double>(j)) * std::pow(pos, static_cast<double>(kk - j)) *
                   gamma_central[j] * gamma_central[kk - j];
        }
        out[kk] = acc;
    }
    return out;
}

std::vector<double> cumulants(const VgParams& p, std::size_t k) {
    p.validate();
    std::vector<double> kappa(k + 1, 0.0);
    const double pos = p.scale_pos();    // theta + s
    const double neg = -p.scale_neg();   // theta - s
    double fact = 1.0;                   // (j-1)!
    double pp = 1.0;
    double pn = 1.0;
    for (std::size_t j = 1; j <= k; ++j) {
        if (j > 1) fact *= static_cast<double>(j - 1);
        pp *= pos;
        pn *= neg;
        kappa[j] = fact * 0.5 * p.r * (pp + pn);
    }
    if (k >= 1) kappa[1] += p.mu;
    return kappa;
}

std::vector<double> moments_from_cumulants(std::span<const double> kappa) {
    const std::size_t n = kappa.empty() ? 0 : kappa.size() - 1;
    std::vector<double> m(n + 1, 0.0);
    m[0] = 1.0;
    // m_j = sum_{i=1}^{j} C(j-1, i-1) kappa_i m_{j-i}
    for (std::size_t j = 1; j <= n; ++j) {
        const auto c = binomial_row(j - 1);
        double acc = 0.0;
        for (std::size_t i = 1; i <= j; ++i) acc += c[i - 1] * kappa[i] * m[j - i];
        m[j] = acc;
    }
    return m;
}

MomentSet moments_summary(const VgParams& p) {
    p.validate();
    MomentSet out;
    const double r = p.r;
    const double s2 = p.sigma * p.sigma;
    const double t2 = p.theta * p.theta;
    out.mean = p.mu + r * p.theta;
    out.variance = r * (s2 + 2.0 * t2);
    const double m3 = 2.0 * r * p.theta * (3.0 * s2 + 4.0 * t2);
    const double m4 = 3.0 * r * ((r + 2.0) * s2 * s2 + (4.0 * r + 16.0) * t2 * s2 + (4.0 * r + 16.0) * t2 * t2);
    out.central = {1.0, 0.0, out.variance, m3, m4};
    VgParams centered = p;
    centered.mu = 0.0;
    out.raw = shift_raw_moments(raw_moments(centered, 4), p.mu);
    out.skewness = m3 / std::pow(out.variance, 1.5);
    out.kurtosis = m4 / (out.variance * out.variance);
    out.excess_kurtosis = 6.0 * (s2 * s2 + 8.0 * t2 * s2 + 8.0 * t2 * t2) / (r * (s2 + 2.0 * t2) * (s2 + 2.0 * t2));
    return out;
}

}  // namespace vg
