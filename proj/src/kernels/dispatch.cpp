#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kerrcav/kernels.hpp"

namespace kerrcav::kernels {
namespace {

bool cpu_has_avx2() {
#if KERRCAV_HAVE_AVX2 && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa initial_isa() {
    Isa isa = isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
    if (const char* env = std::getenv("KERRCAV_ISA")) {
        const std::string v(env);
        if (v == "scalar") isa = Isa::Scalar;
        else if (v == "avx2" && isa_available(Isa::Avx2)) isa = Isa::Avx2;
    }
    return isa;
}

std::atomic<const KernelTable*>& active_slot() {
    static std::atomic<const KernelTable*> slot{&table(initial_isa())};
    return slot;
}

} // namespace

bool isa_available(Isa isa) {
    if (isa == Isa::Scalar) return true;
    static const bool avx2 = detail::avx2_table() != nullptr && cpu_has_avx2();
    return avx2;
}

const KernelTable& table(Isa isa) {
    if (isa == Isa::Avx2) {
        if (!isa_available(Isa::Avx2)) throw std::runtime_error("AVX2 kernels are not available on this CPU");
        return *detail::avx2_table();
    }
    return detail::scalar_table();
}

Isa active_isa() { return active_slot().load() == &detail::scalar_table() ? Isa::Scalar : Isa::Avx2; }

void force_isa(Isa isa) { active_slot().store(&table(isa)); }

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void axpy(double a, std::span<const cplx> x, std::span<cplx> y) {
    active_slot().load()->axpy_real(a, x.data(), y.data(), y.size());
}

void caxpy(cplx a, std::span<const cplx> x, std::span<cplx> y) {
    active_slot().load()->caxpy(a, x.data(), y.data(), y.size());
}

double scaled_sq_norm(std::span<const cplx> e, std::span<const cplx> y0, std::span<const cplx> y1, double atol,
                      double rtol) {
    return active_slot().load()->scaled_sq_norm(e.data(), y0.data(), y1.data(), e.size(), atol, rtol);
}

void dft_band(std::span<const cplx> x, std::span<const double> weights, double t0, double dt,
              std::span<const double> omegas, std::span<cplx> out) {
    active_slot().load()->dft_band(x.data(), weights.data(), x.size(), t0, dt, omegas.data(), out.data(),
                                   omegas.size());
}

void csr_times_dense(std::span<const int> row_ptr, std::span<const int> col_idx, std::span<const cplx> values,
                     std::span<const cplx> dense, std::size_t cols, std::span<cplx> out) {
    const auto* k = active_slot().load();
    const std::size_t rows = row_ptr.size() - 1;
    for (std::size_t i = 0; i < rows; ++i) {
        cplx* dst = out.data() + i * cols;
        std::fill(dst, dst + cols, cplx{});
        for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
            k->caxpy(values[p], dense.data() + static_cast<std::size_t>(col_idx[p]) * cols, dst, cols);
    }
}

} // namespace kerrcav::kernels
