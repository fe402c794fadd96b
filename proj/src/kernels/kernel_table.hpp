#pragma once

#include <cstddef>

#include "vg/kernels.hpp"

namespace vg::kernels::detail {

// Raw-pointer entry points; spans are unpacked and validated by the
// dispatcher before any variant runs.
struct KernelTable {
    void (*log_bessel_k)(double nu, const double* x, double* log_k, double* ratio, std::size_t n);
    void (*log)(const double* x, double* out, std::size_t n);
    void (*normal_variance_mean)(double mu, double theta, double sigma, const double* s, const double* z,
                                 double* out, std::size_t n);
    PowerSums (*power_sums)(const double* x, std::size_t n, double center);
    double (*sum)(const double* x, std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*weighted_sq_dev)(const double* x, const double* w, std::size_t n, double center);
};

const KernelTable& scalar_table() noexcept;
#if defined(VG_HAVE_AVX2_KERNELS)
const KernelTable& avx2_table() noexcept;
#endif

}  // namespace vg::kernels::detail
