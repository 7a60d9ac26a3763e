// kernels.hpp: data-parallel inner loops with scalar and AVX2 variants
//
// The scalar table is the reference; the AVX2 table must agree with it to
// rounding. The active table is picked once at startup from CPUID and can be
// pinned with KERRCAV_ISA=scalar|avx2 or force_isa().

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace kerrcav::kernels {

using cplx = std::complex<double>;

enum class Isa { Scalar, Avx2 };

struct KernelTable {
    // y += a * x
    void (*axpy_real)(double a, const cplx* x, cplx* y, std::size_t n);
    // y += a * x
    void (*caxpy)(cplx a, const cplx* x, cplx* y, std::size_t n);
    // sum_i |e_i|^2 / (atol + rtol * max(|y0_i|, |y1_i|))^2
    double (*scaled_sq_norm)(const cplx* e, const cplx* y0, const cplx* y1, std::size_t n, double atol,
                             double rtol);
    // out_j = sum_k w_k x_k exp(i omega_j (t0 + k dt)), j < m
    void (*dft_band)(const cplx* x, const double* w, std::size_t n, double t0, double dt, const double* omegas,
                     cplx* out, std::size_t m);
};

const KernelTable& table(Isa isa);
bool isa_available(Isa isa);
Isa active_isa();
void force_isa(Isa isa);
std::string_view isa_name(Isa isa);

// Samples between exact phasor refreshes in dft_band.
inline constexpr std::size_t kDftRebase = 64;

namespace detail {
const KernelTable& scalar_table();
const KernelTable* avx2_table(); // nullptr when not compiled in
} // namespace detail

void axpy(double a, std::span<const cplx> x, std::span<cplx> y);
void caxpy(cplx a, std::span<const cplx> x, std::span<cplx> y);
double scaled_sq_norm(std::span<const cplx> e, std::span<const cplx> y0, std::span<const cplx> y1, double atol,
                      double rtol);
void dft_band(std::span<const cplx> x, std::span<const double> weights, double t0, double dt,
              std::span<const double> omegas, std::span<cplx> out);

// out = S * D for a CSR matrix S (rows x inner) and a row-major dense D (inner x cols).
void csr_times_dense(std::span<const int> row_ptr, std::span<const int> col_idx, std::span<const cplx> values,
                     std::span<const cplx> dense, std::size_t cols, std::span<cplx> out);

} // namespace kerrcav::kernels
