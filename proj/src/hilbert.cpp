#include "kerrcav/hilbert.hpp"

#include <cmath>
#include <string>

#include "kerrcav/errors.hpp"

namespace kerrcav {

std::size_t HilbertConfig::well_dimension() const noexcept {
    std::size_t d = 1;
    for (int k = 0; k < wells; ++k) d *= static_cast<std::size_t>(nu_max + 1);
    return d;
}

std::size_t HilbertConfig::dimension() const noexcept {
    return static_cast<std::size_t>(n_photon_max + 1) * well_dimension();
}

void HilbertConfig::validate() const {
    if (n_photon_max < 1) throw ConfigError("n_photon_max must be at least 1");
    if (nu_max < 1) throw ConfigError("nu_max must be at least 1");
    if (wells < 1) throw ConfigError("at least one well is required");
    // Guard against overflow before multiplying out.
    double approx = static_cast<double>(n_photon_max + 1) * std::pow(static_cast<double>(nu_max + 1), wells);
    if (approx > static_cast<double>(dim_cap))
        throw ConfigError("Hilbert space dimension " + std::to_string(static_cast<long long>(approx)) +
                          " exceeds the cap of " + std::to_string(dim_cap));
}

std::size_t basis_index(const HilbertConfig& h, const BasisState& s) {
    std::size_t idx = static_cast<std::size_t>(s.photons);
    for (int k = 0; k < h.wells; ++k) idx = idx * static_cast<std::size_t>(h.nu_max + 1) + static_cast<std::size_t>(s.levels[k]);
    return idx;
}

BasisState basis_state(const HilbertConfig& h, std::size_t index) {
    BasisState s;
    s.levels.assign(static_cast<std::size_t>(h.wells), 0);
    const auto base = static_cast<std::size_t>(h.nu_max + 1);
    for (int k = h.wells - 1; k >= 0; --k) {
        s.levels[k] = static_cast<int>(index % base);
        index /= base;
    }
    s.photons = static_cast<int>(index);
    return s;
}

Operators build_operators(const HilbertConfig& h) {
    h.validate();
    const auto dim = static_cast<int>(h.dimension());
    Operators ops;
    ops.hilbert = h;

    std::vector<Eigen::Triplet<cplx, int>> ta;
    std::vector<std::vector<Eigen::Triplet<cplx, int>>> tb(static_cast<std::size_t>(h.wells));
    for (int i = 0; i < dim; ++i) {
        const BasisState s = basis_state(h, static_cast<std::size_t>(i));
        if (s.photons > 0) {
            BasisState lower = s;
            --lower.photons;
            ta.emplace_back(static_cast<int>(basis_index(h, lower)), i, std::sqrt(static_cast<double>(s.photons)));
        }
        for (int k = 0; k < h.wells; ++k) {
            if (s.levels[k] == 0) continue;
            BasisState lower = s;
            --lower.levels[k];
            tb[k].emplace_back(static_cast<int>(basis_index(h, lower)), i, std::sqrt(static_cast<double>(s.levels[k])));
        }
    }
    ops.a.resize(dim, dim);
    ops.a.setFromTriplets(ta.begin(), ta.end());
    ops.a.makeCompressed();
    for (int k = 0; k < h.wells; ++k) {
        SparseMatrix m(dim, dim);
        m.setFromTriplets(tb[k].begin(), tb[k].end());
        m.makeCompressed();
        ops.b.push_back(std::move(m));
    }
    return ops;
}

std::vector<cplx> to_dense(const SparseMatrix& m) {
    std::vector<cplx> out(static_cast<std::size_t>(m.rows() * m.cols()));
    for (int r = 0; r < m.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(m, r); it; ++it)
            out[static_cast<std::size_t>(it.row() * m.cols() + it.col())] += it.value();
    return out;
}

} // namespace kerrcav
