// ode.hpp: adaptive Dormand-Prince 5(4) integrator for complex state vectors

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace kerrcav {

using cplx = std::complex<double>;

struct OdeOptions {
    double rtol{1e-9};
    double atol{1e-12};
    double h_initial{0.0}; // 0 selects a starting step automatically
    double h_max{std::numeric_limits<double>::infinity()};
    std::size_t max_steps{20'000'000};
};

struct OdeStats {
    std::size_t accepted{0};
    std::size_t rejected{0};
    std::size_t rhs_evals{0};
};

using OdeRhs = std::function<void(double t, std::span<const cplx> y, std::span<cplx> dydt)>;
using OdeObserver = std::function<void(std::size_t index, double t, std::span<const cplx> y)>;

// Integrates y' = f(t, y) from t_start and reports y on the uniform grid
// t_k = t_start + k * dt, k < samples, using the 4th-order continuous extension.
// Throws SolverError on step-size underflow, non-finite state or step budget exhaustion.
OdeStats integrate_uniform(const OdeRhs& rhs, std::vector<cplx> y0, double t_start, double dt, std::size_t samples,
                           const OdeOptions& options, const OdeObserver& observer);

} // namespace kerrcav
