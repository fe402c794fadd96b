#include "vg/statlinks.hpp"

#include <cmath>
#include <string>

#include "vg/error.hpp"

namespace vg {

void BivariateNormalSpec::validate() const {
    if (!(sigma_x > 0.0) || !std::isfinite(sigma_x)) throw DomainError("BivariateNormalSpec: sigma_x must be positive");
    if (!(sigma_y > 0.0) || !std::isfinite(sigma_y)) throw DomainError("BivariateNormalSpec: sigma_y must be positive");
    if (!(rho > -1.0 && rho < 1.0)) throw DomainError("BivariateNormalSpec: rho must lie in (-1, 1)");
}

void WishartSpec::validate() const {
    if (v.rows() != v.cols() || v.rows() < 2) throw DomainError("WishartSpec: V must be square with p >= 2");
    if (v.rows() > 8) throw DomainError("WishartSpec: p is limited to 8");
    if (!v.allFinite()) throw DomainError("WishartSpec: V must be finite");
    const double scale = v.cwiseAbs().maxCoeff();
    if (!(v - v.transpose()).isZero(1e-12 * scale)) throw DomainError("WishartSpec: V must be symmetric");
    if (n < 1) throw DomainError("WishartSpec: n must be >= 1");
}

VgParams product_normal_params(const BivariateNormalSpec& spec, int n_avg) {
    spec.validate();
    if (n_avg < 1) throw PreconditionError("product_normal_params: n must be >= 1");
    const double n = static_cast<double>(n_avg);
    const double sxy = spec.sigma_x * spec.sigma_y;
    return make_params(n, spec.rho * sxy / n, sxy * std::sqrt(1.0 - spec.rho * spec.rho) / n, 0.0);
}

VgParams sample_cov_params(int n, const BivariateNormalSpec& spec) {
    spec.validate();
    if (n < 2) throw PreconditionError("sample_cov_params: n must be >= 2");
    const double nn = static_cast<double>(n);
    const double sxy = spec.sigma_x * spec.sigma_y;
    return make_params(nn - 1.0, spec.rho * sxy / nn, sxy * std::sqrt(1.0 - spec.rho * spec.rho) / nn, 0.0);
}

VgParams wishart_offdiag_params(const WishartSpec& spec, int i, int j) {
    spec.validate();
    const int p = static_cast<int>(spec.v.rows());
    if (i < 0 || j < 0 || i >= p || j >= p) throw PreconditionError("wishart_offdiag_params: index out of range");
    if (i == j) throw PreconditionError("wishart_offdiag_params: diagonal entries are scaled chi-square, not VG");
    const double vij = spec.v(i, j);
    const double det = spec.v(i, i) * spec.v(j, j) - vij * vij;
    if (!(det > 0.0)) throw PreconditionError("wishart_offdiag_params: 2x2 minor of V must be positive definite");
    return make_params(static_cast<double>(spec.n), vij, std::sqrt(det), 0.0);
}

Eigen::MatrixXd bartlett_sample(const WishartSpec& spec, RngStream& rng) {
    spec.validate();
    const Eigen::Index p = spec.v.rows();
    if (spec.n < p) throw PreconditionError("bartlett_sample: need n >= p");
    const Eigen::LLT<Eigen::MatrixXd> llt(spec.v);
    if (llt.info() != Eigen::Success) throw PreconditionError("bartlett_sample: V is not positive definite");
    const Eigen::MatrixXd l = llt.matrixL();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index k = 0; k < p; ++k) {
        // chi_{n-k}: square root of a Gamma((n-k)/2, rate 1/2) draw.
        a(k, k) = std::sqrt(sample_gamma(0.5 * static_cast<double>(spec.n - k), 0.5, rng));
        for (Eigen::Index c = 0; c < k; ++c) a(k, c) = rng.normal();
    }
    const Eigen::MatrixXd la = l * a;
    Eigen::MatrixXd x = la * la.transpose();
    // Exact symmetry regardless of summation order.
    x = 0.5 * (x + x.transpose()).eval();
    return x;
}

NormalPair sample_normal_pair(const BivariateNormalSpec& spec, RngStream& rng) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    return {spec.sigma_x * z1, spec.sigma_y * (spec.rho * z1 + std::sqrt(1.0 - spec.rho * spec.rho) * z2)};
}

std::vector<double> simulate_sample_covariance(const BivariateNormalSpec& spec, int n, std::size_t reps,
                                               RngStream& rng) {
    spec.validate();
    if (n < 2) throw PreconditionError("simulate_sample_covariance: n must be >= 2");
    std::vector<double> out(reps);
    std::vector<NormalPair> pairs(static_cast<std::size_t>(n));
    for (std::size_t r = 0; r < reps; ++r) {
        double mx = 0.0;
        double my = 0.0;
        for (auto& pr : pairs) {
            pr = sample_normal_pair(spec, rng);
            mx += pr.x;
            my += pr.y;
        }
        mx /= n;
        my /= n;
        double acc = 0.0;
        for (const auto& pr : pairs) acc += (pr.x - mx) * (pr.y - my);
        out[r] = acc / n;
    }
    return out;
}

std::vector<double> simulate_product_means(const BivariateNormalSpec& spec, int n_avg, std::size_t reps,
                                           RngStream& rng) {
    spec.validate();
    if (n_avg < 1) throw PreconditionError("simulate_product_means: n must be >= 1");
    std::vector<double> out(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        double acc = 0.0;
        for (int k = 0; k < n_avg; ++k) {
            const NormalPair pr = sample_normal_pair(spec, rng);
            acc += pr.x * pr.y;
        }
        out[r] = acc / n_avg;
    }
    return out;
}

}  // namespace vg
