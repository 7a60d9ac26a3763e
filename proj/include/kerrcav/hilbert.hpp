// hilbert.hpp: truncated cavity ⊗ wells Fock space and ladder operators
//
// Basis ordering: cavity photon number slowest, then well 1, ..., well N.
// |n, nu_1, ..., nu_N> sits at index n (L+1)^N + sum_k nu_k (L+1)^(N-k), L = nu_max.

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

namespace kerrcav {

using cplx = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor, int>;

struct HilbertConfig {
    int n_photon_max{8};
    int nu_max{2};
    int wells{2};
    std::size_t dim_cap{4096};

    std::size_t well_dimension() const noexcept;
    std::size_t dimension() const noexcept;
    // Throws ConfigError on invalid truncation or a dimension above dim_cap.
    void validate() const;

    bool operator==(const HilbertConfig&) const = default;
};

struct BasisState {
    int photons{0};
    std::vector<int> levels;
};

std::size_t basis_index(const HilbertConfig& h, const BasisState& s);
BasisState basis_state(const HilbertConfig& h, std::size_t index);

struct Operators {
    HilbertConfig hilbert;
    SparseMatrix a;              // cavity annihilation
    std::vector<SparseMatrix> b; // one per well
};

Operators build_operators(const HilbertConfig& h);

// Dense row-major copy, mainly for tests and diagnostics.
std::vector<cplx> to_dense(const SparseMatrix& m);

} // namespace kerrcav
