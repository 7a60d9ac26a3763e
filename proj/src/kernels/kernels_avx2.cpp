// Compiled with -mavx2 -mfma; only reached after a CPUID check.

#include "kerrcav/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace kerrcav::kernels {
namespace {

// Two complex doubles per register: [re0, im0, re1, im1].
inline __m256d cmul(__m256d a, __m256d b) {
    const __m256d a_re = _mm256_movedup_pd(a);
    const __m256d a_im = _mm256_permute_pd(a, 0xF);
    const __m256d b_sw = _mm256_permute_pd(b, 0x5);
    return _mm256_fmaddsub_pd(a_re, b, _mm256_mul_pd(a_im, b_sw));
}

// [|v0|^2, |v0|^2, |v1|^2, |v1|^2]
inline __m256d norm2(__m256d v) {
    const __m256d sq = _mm256_mul_pd(v, v);
    return _mm256_add_pd(sq, _mm256_permute_pd(sq, 0x5));
}

void axpy_real_avx2(double a, const cplx* x, cplx* y, std::size_t n) {
    auto* yd = reinterpret_cast<double*>(y);
    const auto* xd = reinterpret_cast<const double*>(x);
    const std::size_t m = 2 * n;
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 8 <= m; i += 8) {
        const __m256d y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(xd + i), _mm256_loadu_pd(yd + i));
        const __m256d y1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(xd + i + 4), _mm256_loadu_pd(yd + i + 4));
        _mm256_storeu_pd(yd + i, y0);
        _mm256_storeu_pd(yd + i + 4, y1);
    }
    for (; i + 4 <= m; i += 4)
        _mm256_storeu_pd(yd + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(xd + i), _mm256_loadu_pd(yd + i)));
    for (; i < m; ++i) yd[i] += a * xd[i];
}

void caxpy_avx2(cplx a, const cplx* x, cplx* y, std::size_t n) {
    auto* yd = reinterpret_cast<double*>(y);
    const auto* xd = reinterpret_cast<const double*>(x);
    const __m256d va = _mm256_setr_pd(a.real(), a.imag(), a.real(), a.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d p = cmul(_mm256_loadu_pd(xd + 2 * i), va);
        _mm256_storeu_pd(yd + 2 * i, _mm256_add_pd(_mm256_loadu_pd(yd + 2 * i), p));
    }
    for (; i < n; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        y[i] += cplx(a.real() * xr - a.imag() * xi, a.real() * xi + a.imag() * xr);
    }
}

double scaled_sq_norm_avx2(const cplx* e, const cplx* y0, const cplx* y1, std::size_t n, double atol,
                           double rtol) {
    const auto* ed = reinterpret_cast<const double*>(e);
    const auto* ad = reinterpret_cast<const double*>(y0);
    const auto* bd = reinterpret_cast<const double*>(y1);
    const __m256d vatol = _mm256_set1_pd(atol);
    const __m256d vrtol = _mm256_set1_pd(rtol);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d e2 = norm2(_mm256_loadu_pd(ed + 2 * i));
        const __m256d ya = _mm256_sqrt_pd(norm2(_mm256_loadu_pd(ad + 2 * i)));
        const __m256d yb = _mm256_sqrt_pd(norm2(_mm256_loadu_pd(bd + 2 * i)));
        const __m256d sc = _mm256_fmadd_pd(vrtol, _mm256_max_pd(ya, yb), vatol);
        acc = _mm256_add_pd(acc, _mm256_div_pd(e2, _mm256_mul_pd(sc, sc)));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    // Each complex entry occupies two identical lanes.
    double s = lanes[0] + lanes[2];
    for (; i < n; ++i) {
        const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        s += std::norm(e[i]) / (sc * sc);
    }
    return s;
}

void dft_band_avx2(const cplx* x, const double* w, std::size_t n, double t0, double dt, const double* omegas,
                   cplx* out, std::size_t m) {
    std::size_t j = 0;
    for (; j + 2 <= m; j += 2) {
        const cplx s0 = std::polar(1.0, omegas[j] * dt);
        const cplx s1 = std::polar(1.0, omegas[j + 1] * dt);
        const __m256d step = _mm256_setr_pd(s0.real(), s0.imag(), s1.real(), s1.imag());
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t k0 = 0; k0 < n; k0 += kDftRebase) {
            const double tk = t0 + static_cast<double>(k0) * dt;
            const cplx z0 = std::polar(1.0, omegas[j] * tk);
            const cplx z1 = std::polar(1.0, omegas[j + 1] * tk);
            __m256d z = _mm256_setr_pd(z0.real(), z0.imag(), z1.real(), z1.imag());
            const std::size_t k1 = std::min(n, k0 + kDftRebase);
            for (std::size_t k = k0; k < k1; ++k) {
                const cplx v = w[k] * x[k];
                const __m256d vv = _mm256_setr_pd(v.real(), v.imag(), v.real(), v.imag());
                acc = _mm256_add_pd(acc, cmul(vv, z));
                z = cmul(z, step);
            }
        }
        alignas(32) double lanes[4];
        _mm256_store_pd(lanes, acc);
        out[j] = {lanes[0], lanes[1]};
        out[j + 1] = {lanes[2], lanes[3]};
    }
    if (j < m) detail::scalar_table().dft_band(x, w, n, t0, dt, omegas + j, out + j, m - j);
}

constexpr KernelTable kAvx2{axpy_real_avx2, caxpy_avx2, scaled_sq_norm_avx2, dft_band_avx2};

} // namespace

namespace detail {
const KernelTable* avx2_table() { return &kAvx2; }
} // namespace detail

} // namespace kerrcav::kernels

#else

namespace kerrcav::kernels::detail {
const KernelTable* avx2_table() { return nullptr; }
} // namespace kerrcav::kernels::detail

#endif
