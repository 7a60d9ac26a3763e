#include <algorithm>
#include <cmath>

#include "kerrcav/kernels.hpp"

namespace kerrcav::kernels {
namespace {

void axpy_real_scalar(double a, const cplx* x, cplx* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void caxpy_scalar(cplx a, const cplx* x, cplx* y, std::size_t n) {
    const double ar = a.real(), ai = a.imag();
    for (std::size_t i = 0; i < n; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        y[i] += cplx(ar * xr - ai * xi, ar * xi + ai * xr);
    }
}

double scaled_sq_norm_scalar(const cplx* e, const cplx* y0, const cplx* y1, std::size_t n, double atol,
                             double rtol) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        s += std::norm(e[i]) / (sc * sc);
    }
    return s;
}

void dft_band_scalar(const cplx* x, const double* w, std::size_t n, double t0, double dt, const double* omegas,
                     cplx* out, std::size_t m) {
    for (std::size_t j = 0; j < m; ++j) {
        const cplx step = std::polar(1.0, omegas[j] * dt);
        cplx acc{};
        for (std::size_t k0 = 0; k0 < n; k0 += kDftRebase) {
            cplx z = std::polar(1.0, omegas[j] * (t0 + static_cast<double>(k0) * dt));
            const std::size_t k1 = std::min(n, k0 + kDftRebase);
            for (std::size_t k = k0; k < k1; ++k) {
                acc += (w[k] * x[k]) * z;
                z *= step;
            }
        }
        out[j] = acc;
    }
}

constexpr KernelTable kScalar{axpy_real_scalar, caxpy_scalar, scaled_sq_norm_scalar, dft_band_scalar};

} // namespace

namespace detail {
const KernelTable& scalar_table() { return kScalar; }
} // namespace detail

} // namespace kerrcav::kernels
