// AVX2+FMA kernels, four doubles per register. This translation unit is the
// only one compiled with -mavx2 -mfma; nothing here runs unless the
// dispatcher has confirmed CPU support.

#include <immintrin.h>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "../bessel_detail.hpp"
#include "kernel_table.hpp"

namespace vg::kernels::detail {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 100000;

inline __m256d vabs(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

// Natural log of positive normal doubles: split x = 2^e m with m in
// [sqrt(1/2), sqrt(2)), then log m = 2 atanh(z), z = (m-1)/(m+1), |z| < 0.172.
inline __m256d vlog(__m256d x) {
    const __m256i bits = _mm256_castpd_si256(x);
    const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
    const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
    __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));
    // Biased exponent (0..2047) to double via the 2^52 trick.
    const __m256i biased = _mm256_srli_epi64(bits, 52);
    const __m256d two52 = _mm256_set1_pd(0x1p52);
    __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(biased, _mm256_castpd_si256(two52))), two52);
    e = _mm256_sub_pd(e, _mm256_set1_pd(1023.0));
    const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(std::numbers::sqrt2), _CMP_GT_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
    e = _mm256_add_pd(e, _mm256_and_pd(big, _mm256_set1_pd(1.0)));

    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d z = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
    const __m256d z2 = _mm256_mul_pd(z, z);
    // sum_{k=0}^{13} z2^k / (2k+1); truncation error < 0.172^28 / 29
    __m256d p = _mm256_set1_pd(1.0 / 27.0);
    for (int k = 12; k >= 0; --k) p = _mm256_fmadd_pd(p, z2, _mm256_set1_pd(1.0 / (2 * k + 1)));
    const __m256d log_m = _mm256_mul_pd(_mm256_add_pd(z, z), p);

    constexpr double kLn2Hi = 6.93147180369123816490e-01;
    constexpr double kLn2Lo = 1.90821492927058770002e-10;
    return _mm256_fmadd_pd(e, _mm256_set1_pd(kLn2Hi), _mm256_fmadd_pd(e, _mm256_set1_pd(kLn2Lo), log_m));
}

// exp for |x| < 708: x = k ln2 + t with |t| <= ln2/2, exp(t) by a degree-13
// Taylor polynomial (truncation < 2e-17 relative), then scaled by 2^k.
inline __m256d vexp(__m256d x) {
    constexpr double kLn2Hi = 6.93147180369123816490e-01;
    constexpr double kLn2Lo = 1.90821492927058770002e-10;
    const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(std::numbers::log2e)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d t = _mm256_fnmadd_pd(k, _mm256_set1_pd(kLn2Hi), x);
    t = _mm256_fnmadd_pd(k, _mm256_set1_pd(kLn2Lo), t);
    double coef[14];
    coef[0] = 1.0;
    for (int j = 1; j < 14; ++j) coef[j] = coef[j - 1] / j;
    __m256d p = _mm256_set1_pd(coef[13]);
    for (int j = 12; j >= 0; --j) p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(coef[j]));
    // 2^k through the exponent field; k is integral and within range here.
    const __m128i k32 = _mm256_cvtpd_epi32(k);
    const __m256i k64 = _mm256_cvtepi32_epi64(k32);
    const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(k64, _mm256_set1_epi64x(1023)), 52);
    return _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
}

// Temme's series on four lanes at common order, all lanes 0 < x <= 2.
// Mirrors specfun::detail::temme_series; sinh(e)/e switches to its Taylor
// series for |e| < 0.1 where the exponential form cancels.
inline void temme_x4(const specfun::detail::TemmeOrder& g, __m256d x, __m256d& log_k, __m256d& ratio) {
    const double mu = g.mu;
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d x2 = _mm256_mul_pd(half, x);
    const __m256d d = _mm256_sub_pd(_mm256_setzero_pd(), vlog(x2));
    const __m256d e = _mm256_mul_pd(_mm256_set1_pd(mu), d);
    const __m256d ee = vexp(e);
    const __m256d inv_ee = _mm256_div_pd(one, ee);
    const __m256d cosh_e = _mm256_mul_pd(half, _mm256_add_pd(ee, inv_ee));
    const __m256d e2 = _mm256_mul_pd(e, e);
    __m256d series = _mm256_set1_pd(1.0 / 39916800.0);
    series = _mm256_fmadd_pd(series, e2, _mm256_set1_pd(1.0 / 362880.0));
    series = _mm256_fmadd_pd(series, e2, _mm256_set1_pd(1.0 / 5040.0));
    series = _mm256_fmadd_pd(series, e2, _mm256_set1_pd(1.0 / 120.0));
    series = _mm256_fmadd_pd(series, e2, _mm256_set1_pd(1.0 / 6.0));
    series = _mm256_fmadd_pd(series, e2, one);
    const __m256d direct = _mm256_div_pd(_mm256_mul_pd(half, _mm256_sub_pd(ee, inv_ee)), e);
    const __m256d small_e = _mm256_cmp_pd(vabs(e), _mm256_set1_pd(0.1), _CMP_LT_OQ);
    const __m256d fact2 = _mm256_blendv_pd(direct, series, small_e);

    __m256d ff = _mm256_mul_pd(_mm256_set1_pd(g.fact),
                               _mm256_fmadd_pd(_mm256_set1_pd(g.gam1), cosh_e,
                                               _mm256_mul_pd(_mm256_set1_pd(g.gam2), _mm256_mul_pd(fact2, d))));
    __m256d sum = ff;
    __m256d p = _mm256_mul_pd(_mm256_set1_pd(0.5 / g.gampl), ee);
    __m256d q = _mm256_mul_pd(_mm256_set1_pd(0.5 / g.gammi), inv_ee);
    __m256d c = one;
    const __m256d dd = _mm256_mul_pd(x2, x2);
    __m256d sum1 = p;
    __m256d active = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
    const __m256d eps = _mm256_set1_pd(kEps);
    const double mu2 = mu * mu;
    for (int i = 1; i <= kMaxIter; ++i) {
        const double di = static_cast<double>(i);
        const __m256d vi = _mm256_set1_pd(di);
        ff = _mm256_mul_pd(_mm256_fmadd_pd(vi, ff, _mm256_add_pd(p, q)), _mm256_set1_pd(1.0 / (di * di - mu2)));
        c = _mm256_mul_pd(_mm256_mul_pd(c, dd), _mm256_set1_pd(1.0 / di));
        p = _mm256_mul_pd(p, _mm256_set1_pd(1.0 / (di - mu)));
        q = _mm256_mul_pd(q, _mm256_set1_pd(1.0 / (di + mu)));
        const __m256d del = _mm256_mul_pd(c, ff);
        const __m256d sum_new = _mm256_add_pd(sum, del);
        const __m256d sum1_new = _mm256_fmadd_pd(c, _mm256_fnmadd_pd(vi, ff, p), sum1);
        sum = _mm256_blendv_pd(sum, sum_new, active);
        sum1 = _mm256_blendv_pd(sum1, sum1_new, active);
        const __m256d done = _mm256_cmp_pd(vabs(del), _mm256_mul_pd(vabs(sum_new), eps), _CMP_LT_OQ);
        active = _mm256_andnot_pd(done, active);
        if (_mm256_movemask_pd(active) == 0) break;
    }
    log_k = vlog(sum);
    ratio = _mm256_mul_pd(_mm256_div_pd(sum1, sum), _mm256_div_pd(_mm256_set1_pd(2.0), x));
}

// Steed's CF2 on K groups of four lanes at common order mu. The groups are
// independent and interleaved so the serial division chains overlap. Lanes
// converge at different iterations; a converged lane keeps h and s frozen.
// Returns log K_mu and K_{mu+1}/K_mu per lane.
template <int K>
inline void steed_cf2_xk(double mu, const __m256d* x, __m256d* log_k, __m256d* ratio) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d eps = _mm256_set1_pd(kEps);
    const double a1 = 0.25 - mu * mu;
    __m256d b[K], d[K], h[K], delh[K], q1[K], q2[K], q[K], s[K], active[K];
    for (int j = 0; j < K; ++j) {
        b[j] = _mm256_mul_pd(_mm256_set1_pd(2.0), _mm256_add_pd(one, x[j]));
        d[j] = _mm256_div_pd(one, b[j]);
        h[j] = d[j];
        delh[j] = d[j];
        q1[j] = _mm256_setzero_pd();
        q2[j] = one;
        q[j] = _mm256_set1_pd(a1);
        s[j] = _mm256_fmadd_pd(q[j], delh[j], one);
        active[j] = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
    }
    double c = a1;
    double a = -a1;
    for (int i = 2; i <= kMaxIter; ++i) {
        a -= 2.0 * (i - 1);
        c = -a * c / i;
        const __m256d va = _mm256_set1_pd(a);
        const __m256d inv_a = _mm256_set1_pd(1.0 / a);
        const __m256d vc = _mm256_set1_pd(c);
        int any = 0;
        for (int j = 0; j < K; ++j) {
            const __m256d qnew = _mm256_mul_pd(_mm256_fnmadd_pd(b[j], q2[j], q1[j]), inv_a);
            q1[j] = q2[j];
            q2[j] = qnew;
            q[j] = _mm256_fmadd_pd(vc, qnew, q[j]);
            b[j] = _mm256_add_pd(b[j], _mm256_set1_pd(2.0));
            d[j] = _mm256_div_pd(one, _mm256_fmadd_pd(va, d[j], b[j]));
            delh[j] = _mm256_mul_pd(_mm256_fmsub_pd(b[j], d[j], one), delh[j]);
            const __m256d h_new = _mm256_add_pd(h[j], delh[j]);
            const __m256d dels = _mm256_mul_pd(q[j], delh[j]);
            const __m256d s_new = _mm256_add_pd(s[j], dels);
            h[j] = _mm256_blendv_pd(h[j], h_new, active[j]);
            s[j] = _mm256_blendv_pd(s[j], s_new, active[j]);
            const __m256d done = _mm256_cmp_pd(vabs(dels), _mm256_mul_pd(vabs(s_new), eps), _CMP_LT_OQ);
            active[j] = _mm256_andnot_pd(done, active[j]);
            any |= _mm256_movemask_pd(active[j]);
        }
        if (any == 0) break;
    }
    for (int j = 0; j < K; ++j) {
        const __m256d hh = _mm256_mul_pd(h[j], _mm256_set1_pd(a1));
        // log K_mu = log(sqrt(pi/2x) / s) - x, folded into one vector log
        const __m256d pref = _mm256_sqrt_pd(_mm256_div_pd(_mm256_set1_pd(std::numbers::pi / 2.0), x[j]));
        log_k[j] = _mm256_sub_pd(vlog(_mm256_div_pd(pref, s[j])), x[j]);
        ratio[j] = _mm256_div_pd(_mm256_sub_pd(_mm256_add_pd(_mm256_set1_pd(mu + 0.5), x[j]), hh), x[j]);
    }
}

// Forward recurrence on the ratio, as in the scalar path: a lane whose
// running product would pass 1e200 folds it into the log first.
inline void raise_order_x4(double mu, int steps, __m256d x, __m256d& log_k, __m256d& ratio) {
    const __m256d two_over_x = _mm256_div_pd(_mm256_set1_pd(2.0), x);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d limit = _mm256_set1_pd(1e200);
    __m256d product = one;
    for (int k = 1; k <= steps; ++k) {
        const __m256d next = _mm256_mul_pd(product, ratio);
        const __m256d big = _mm256_cmp_pd(next, limit, _CMP_GE_OQ);
        if (_mm256_movemask_pd(big) != 0) {
            const __m256d folded = _mm256_add_pd(log_k, _mm256_add_pd(vlog(product), vlog(ratio)));
            log_k = _mm256_blendv_pd(log_k, folded, big);
            product = _mm256_blendv_pd(next, one, big);
        } else {
            product = next;
        }
        ratio = _mm256_fmadd_pd(_mm256_set1_pd(mu + k), two_over_x, _mm256_div_pd(one, ratio));
    }
    log_k = _mm256_add_pd(log_k, vlog(product));
}

// Arguments are split into the Temme (x <= 2) and continued-fraction
// regions and each region is packed contiguously, so every vector runs a
// single branch. Leftover lanes and invalid arguments go through the scalar
// reference path.
void log_bessel_k(double nu, const double* x, double* log_k, double* ratio, std::size_t n) {
    const specfun::detail::BatchOrder order(nu);
    const double mu = order.mu();
    const int steps = order.steps();
    const double cutoff = specfun::detail::kTemmeCutoff;

    thread_local std::vector<std::uint32_t> idx_small;
    thread_local std::vector<std::uint32_t> idx_large;
    idx_small.clear();
    idx_large.clear();
    for (std::size_t i = 0; i < n; ++i) {
        const double v = x[i];
        if (v > 0.0 && v <= cutoff) {
            idx_small.push_back(static_cast<std::uint32_t>(i));
        } else if (v > cutoff && v < 1e300) {
            idx_large.push_back(static_cast<std::uint32_t>(i));
        } else {
            const specfun::BesselKPair p = order.eval(v);  // throws on invalid input
            log_k[i] = p.log_k;
            if (ratio != nullptr) ratio[i] = p.ratio;
        }
    }

    auto finish = [&](const std::uint32_t* ids, __m256d vx, __m256d vlk, __m256d vrt) {
        raise_order_x4(mu, steps, vx, vlk, vrt);
        if (order.flip()) {
            vlk = _mm256_add_pd(vlk, vlog(vrt));
            vrt = _mm256_div_pd(_mm256_set1_pd(1.0), vrt);
        }
        alignas(32) double lk[4];
        alignas(32) double rt[4];
        _mm256_store_pd(lk, vlk);
        _mm256_store_pd(rt, vrt);
        for (int lane = 0; lane < 4; ++lane) {
            log_k[ids[lane]] = lk[lane];
            if (ratio != nullptr) ratio[ids[lane]] = rt[lane];
        }
    };
    auto gather = [&](const std::uint32_t* ids) { return _mm256_set_pd(x[ids[3]], x[ids[2]], x[ids[1]], x[ids[0]]); };
    auto run = [&](const std::vector<std::uint32_t>& idx, bool small) {
        std::size_t j = 0;
        if (!small) {
            for (; j + 16 <= idx.size(); j += 16) {
                __m256d vx[4];
                __m256d vlk[4];
                __m256d vrt[4];
                for (int g = 0; g < 4; ++g) vx[g] = gather(&idx[j + 4 * g]);
                steed_cf2_xk<4>(mu, vx, vlk, vrt);
                for (int g = 0; g < 4; ++g) finish(&idx[j + 4 * g], vx[g], vlk[g], vrt[g]);
            }
        }
        for (; j + 4 <= idx.size(); j += 4) {
            const __m256d vx = gather(&idx[j]);
            __m256d vlk;
            __m256d vrt;
            if (small) {
                temme_x4(order.temme(), vx, vlk, vrt);
            } else {
                steed_cf2_xk<1>(mu, &vx, &vlk, &vrt);
            }
            finish(&idx[j], vx, vlk, vrt);
        }
        for (; j < idx.size(); ++j) {
            const specfun::BesselKPair p = order.eval(x[idx[j]]);
            log_k[idx[j]] = p.log_k;
            if (ratio != nullptr) ratio[idx[j]] = p.ratio;
        }
    };
    run(idx_small, true);
    run(idx_large, false);
}

void log_values(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, vlog(_mm256_loadu_pd(x + i)));
    for (; i < n; ++i) out[i] = std::log(x[i]);
}

void normal_variance_mean(double mu, double theta, double sigma, const double* s, const double* z, double* out,
                          std::size_t n) {
    const __m256d vmu = _mm256_set1_pd(mu);
    const __m256d vtheta = _mm256_set1_pd(theta);
    const __m256d vsigma = _mm256_set1_pd(sigma);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vs = _mm256_loadu_pd(s + i);
        const __m256d vz = _mm256_loadu_pd(z + i);
        const __m256d scale = _mm256_mul_pd(vsigma, _mm256_sqrt_pd(vs));
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(scale, vz, _mm256_fmadd_pd(vtheta, vs, vmu)));
    }
    for (; i < n; ++i) out[i] = mu + theta * s[i] + sigma * std::sqrt(s[i]) * z[i];
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

PowerSums power_sums(const double* x, std::size_t n, double center) {
    const __m256d vc = _mm256_set1_pd(center);
    __m256d a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd();
    __m256d a3 = _mm256_setzero_pd();
    __m256d a4 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), vc);
        const __m256d d2 = _mm256_mul_pd(d, d);
        a1 = _mm256_add_pd(a1, d);
        a2 = _mm256_add_pd(a2, d2);
        a3 = _mm256_fmadd_pd(d2, d, a3);
        a4 = _mm256_fmadd_pd(d2, d2, a4);
    }
    PowerSums p{hsum(a1), hsum(a2), hsum(a3), hsum(a4)};
    for (; i < n; ++i) {
        const double d = x[i] - center;
        const double d2 = d * d;
        p.s1 += d;
        p.s2 += d2;
        p.s3 += d2 * d;
        p.s4 += d2 * d2;
    }
    return p;
}

double sum(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double weighted_sq_dev(const double* x, const double* w, std::size_t n, double center) {
    const __m256d vc = _mm256_set1_pd(center);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), vc);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), d), d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = x[i] - center;
        s += w[i] * d * d;
    }
    return s;
}

constexpr KernelTable kAvx2{log_bessel_k, log_values, normal_variance_mean, power_sums, sum, dot, weighted_sq_dev};

}  // namespace

const KernelTable& avx2_table() noexcept { return kAvx2; }

}  // namespace vg::kernels::detail
