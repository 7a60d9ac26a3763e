#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "kerrcav/kernels.hpp"

using namespace kerrcav;
using kernels::cplx;
using kernels::Isa;

namespace {

std::vector<cplx> random_vector(std::size_t n, std::mt19937& rng) {
    std::normal_distribution<double> d;
    std::vector<cplx> v(n);
    for (auto& z : v) z = {d(rng), d(rng)};
    return v;
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("kernel tables and dispatch") {
    CHECK(kernels::isa_available(Isa::Scalar));
    CHECK(kernels::isa_name(Isa::Scalar) == "scalar");
    const Isa original = kernels::active_isa();
    kernels::force_isa(Isa::Scalar);
    CHECK(kernels::active_isa() == Isa::Scalar);
    kernels::force_isa(original);
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
    if (!kernels::isa_available(Isa::Avx2)) {
        MESSAGE("AVX2 not available on this machine; equivalence test skipped");
        return;
    }
    const auto& s = kernels::table(Isa::Scalar);
    const auto& v = kernels::table(Isa::Avx2);
    std::mt19937 rng(3);

    for (std::size_t n = 0; n <= 67; ++n) {
        const auto x = random_vector(n, rng);
        const auto y0 = random_vector(n, rng);

        auto ys = y0, yv = y0;
        s.axpy_real(0.37, x.data(), ys.data(), n);
        v.axpy_real(0.37, x.data(), yv.data(), n);
        CHECK(max_abs_diff(ys, yv) <= 1e-15 * 8);

        ys = y0;
        yv = y0;
        const cplx a{-0.4, 1.3};
        s.caxpy(a, x.data(), ys.data(), n);
        v.caxpy(a, x.data(), yv.data(), n);
        CHECK(max_abs_diff(ys, yv) <= 1e-14);

        const double ns = s.scaled_sq_norm(x.data(), y0.data(), ys.data(), n, 1e-12, 1e-9);
        const double nv = v.scaled_sq_norm(x.data(), y0.data(), ys.data(), n, 1e-12, 1e-9);
        CHECK(nv == doctest::Approx(ns).epsilon(1e-13));
    }

    for (std::size_t n : {0u, 1u, 63u, 64u, 65u, 200u, 1531u}) {
        const auto x = random_vector(n, rng);
        std::vector<double> w(n, 0.01);
        for (std::size_t m : {1u, 2u, 3u, 17u}) {
            std::vector<double> om(m);
            for (std::size_t j = 0; j < m; ++j) om[j] = 35.0 + 0.7 * static_cast<double>(j);
            std::vector<cplx> os(m), ov(m);
            s.dft_band(x.data(), w.data(), n, 1.2, 0.004, om.data(), os.data(), m);
            v.dft_band(x.data(), w.data(), n, 1.2, 0.004, om.data(), ov.data(), m);
            double scale = 1e-300;
            for (const auto& z : os) scale = std::max(scale, std::abs(z));
            CHECK(max_abs_diff(os, ov) <= 1e-12 * std::max(1.0, scale));
        }
    }
}

TEST_CASE("band DFT matches direct evaluation of every phasor") {
    std::mt19937 rng(5);
    const std::size_t n = 5000;
    const auto x = random_vector(n, rng);
    std::vector<double> w(n, 0.004);
    const double t0 = 1.065, dt = 0.004;
    std::vector<double> om{30.0, 39.99, 40.0, 41.234, 52.5};
    for (Isa isa : {Isa::Scalar, Isa::Avx2}) {
        if (!kernels::isa_available(isa)) continue;
        std::vector<cplx> out(om.size());
        kernels::table(isa).dft_band(x.data(), w.data(), n, t0, dt, om.data(), out.data(), om.size());
        for (std::size_t j = 0; j < om.size(); ++j) {
            cplx ref{};
            for (std::size_t k = 0; k < n; ++k)
                ref += w[k] * x[k] * std::polar(1.0, om[j] * (t0 + static_cast<double>(k) * dt));
            CHECK(std::abs(out[j] - ref) <= 1e-10 * std::abs(ref) + 1e-12);
        }
    }
}

TEST_CASE("sparse times dense matches a dense product") {
    std::mt19937 rng(9);
    const int rows = 13, inner = 13, cols = 13;
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(rows, inner);
    std::vector<int> row_ptr{0}, col_idx;
    std::vector<cplx> vals;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < inner; ++c) {
            if (u(rng) < 0.25) {
                const cplx z{u(rng) - 0.5, u(rng) - 0.5};
                s(r, c) = z;
                col_idx.push_back(c);
                vals.push_back(z);
            }
        }
        row_ptr.push_back(static_cast<int>(col_idx.size()));
    }
    const auto dense = random_vector(static_cast<std::size_t>(inner * cols), rng);
    Eigen::MatrixXcd d(inner, cols);
    for (int i = 0; i < inner; ++i)
        for (int j = 0; j < cols; ++j) d(i, j) = dense[static_cast<std::size_t>(i * cols + j)];
    const Eigen::MatrixXcd ref = s * d;
    std::vector<cplx> out(static_cast<std::size_t>(rows * cols), cplx{99.0, 99.0});
    kernels::csr_times_dense(row_ptr, col_idx, vals, dense, static_cast<std::size_t>(cols), out);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) CHECK(std::abs(out[static_cast<std::size_t>(i * cols + j)] - ref(i, j)) < 1e-13);
}
