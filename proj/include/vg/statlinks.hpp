#pragma once

// Exact VG laws of sample covariances, products of correlated normals and
// off-diagonal Wishart entries. They are built from raw normal draws and
// share no code with the VG density, so they serve as independent oracles.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "vg/params.hpp"
#include "vg/sampling.hpp"

namespace vg {

struct BivariateNormalSpec {
    double sigma_x = 1.0;  // > 0
    double sigma_y = 1.0;  // > 0
    double rho = 0.0;      // in (-1, 1)

    // Throws DomainError when the fields are outside their ranges.
    void validate() const;
};

struct WishartSpec {
    Eigen::MatrixXd v;  // symmetric positive definite, at most 8 x 8
    int n = 1;          // degrees of freedom

    // Throws DomainError on a non-square, asymmetric or oversized V, or n < 1.
    void validate() const;
};

// Mean of n_avg i.i.d. products XY: VG(n, rho sx sy / n, sx sy sqrt(1 - rho^2) / n, 0).
VgParams product_normal_params(const BivariateNormalSpec& spec, int n_avg);

// p_n = (1/n) sum (X_i - Xbar)(Y_i - Ybar): VG(n - 1, rho sx sy / n, sx sy sqrt(1 - rho^2) / n, 0).
// Throws PreconditionError unless n >= 2.
VgParams sample_cov_params(int n, const BivariateNormalSpec& spec);

// Off-diagonal entry (i, j) of W_p(V, n): VG(n, v_ij, sqrt(v_ii v_jj - v_ij^2), 0).
// Throws PreconditionError on i == j or out-of-range indices.
VgParams wishart_offdiag_params(const WishartSpec& spec, int i, int j);

// X = L A A^T L^T with L the Cholesky factor of V, A lower triangular with
// A_kk = chi_{n-k} (0-based k) and standard normal entries below the diagonal.
// Throws PreconditionError when V is not positive definite or n < p.
Eigen::MatrixXd bartlett_sample(const WishartSpec& spec, RngStream& rng);

// One pair (X, Y) from the bivariate normal spec.
struct NormalPair {
    double x;
    double y;
};
NormalPair sample_normal_pair(const BivariateNormalSpec& spec, RngStream& rng);

// `reps` draws of p_n, each from n fresh bivariate normal pairs.
std::vector<double> simulate_sample_covariance(const BivariateNormalSpec& spec, int n, std::size_t reps,
                                               RngStream& rng);

// `reps` draws of the mean of n_avg products XY.
std::vector<double> simulate_product_means(const BivariateNormalSpec& spec, int n_avg, std::size_t reps,
                                           RngStream& rng);

}  // namespace vg
