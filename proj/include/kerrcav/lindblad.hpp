// lindblad.hpp: density-matrix propagation of the driven, damped cavity-well system
//
// H = w_c a^+a + sum_n [w_n b_n^+b_n - U_n b_n^+b_n^+b_nb_n + g_n (a b_n^+ + a^+ b_n)]
//     + F(t) a^+ + F(t)^* a
// with zero-temperature decay of the cavity (kappa) and of each well (gamma_n).
// The right-hand side acts on the D x D matrix directly; no superoperator is formed.

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kerrcav/hilbert.hpp"
#include "kerrcav/model.hpp"
#include "kerrcav/ode.hpp"

namespace kerrcav {

struct DensityMatrix {
    std::size_t dim{0};
    double time{0.0};
    std::vector<cplx> data; // row-major

    cplx& operator()(std::size_t i, std::size_t j) { return data[i * dim + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return data[i * dim + j]; }

    // |index><index|
    static DensityMatrix pure(std::size_t dim, std::size_t index);
};

cplx trace(const DensityMatrix& rho);
double hermiticity_deviation(const DensityMatrix& rho); // max |rho - rho^+|
double min_eigenvalue(const DensityMatrix& rho);
// tr(A rho)
cplx expectation(const SparseMatrix& op, std::span<const cplx> rho, std::size_t dim);

// Static Hamiltonian; in the rotating frame every oscillator frequency is reduced by omega_d.
SparseMatrix build_hamiltonian(const SystemConfig& cfg, const Operators& ops, Frame frame = Frame::Lab);
SparseMatrix build_hamiltonian(const SystemConfig& cfg, const HilbertConfig& h, Frame frame = Frame::Lab);

// Precomputed generator for one configuration, evaluated in cfg.frame.
// Immutable after construction; apply() may be called concurrently.
class LindbladGenerator {
public:
    LindbladGenerator(const SystemConfig& cfg, const HilbertConfig& h);

    const SystemConfig& config() const noexcept { return cfg_; }
    const Operators& operators() const noexcept { return ops_; }
    std::size_t dimension() const noexcept { return dim_; }

    // drho = d rho / dt. With hermitian_input the term rho K^+ is taken as (K rho)^+.
    void apply(double t, std::span<const cplx> rho, std::span<cplx> drho, bool hermitian_input = false) const;

private:
    SystemConfig cfg_;
    Operators ops_;
    std::size_t dim_;
    // -i H_eff(t) on a fixed sparsity pattern: values = k0 + f(t) k_up + conj(f(t)) k_down.
    std::vector<int> row_ptr_;
    std::vector<int> col_idx_;
    std::vector<cplx> k0_, k_up_, k_down_;
    std::vector<SparseMatrix> jumps_; // sqrt(rate) L
};

DensityMatrix lindblad_rhs(const DensityMatrix& rho, double t, const SystemConfig& cfg, const HilbertConfig& h);

struct LindbladOptions {
    double t_start{0.0};
    double t_end{0.0}; // 0 selects default_t_end
    double dt{0.0};    // 0 selects default_sample_spacing
    OdeOptions ode{};  // h_max defaults to T/2 when left infinite
    std::vector<double> checkpoint_times;
    std::size_t positivity_stride{25}; // eigenvalue check every this many samples
    double truncation_tolerance{1e-4}; // on the top photon level population
    double positivity_abort{1e-6};
    std::optional<DensityMatrix> initial; // global vacuum when absent
};

struct LindbladSeries {
    SystemConfig config;
    HilbertConfig hilbert;
    double t_start{0.0};
    double dt{0.0};
    std::size_t samples{0};

    // Stored in config.frame.
    std::vector<cplx> field;
    std::vector<std::vector<cplx>> wells; // <b_n>
    std::vector<cplx> bright;             // <B_0>
    std::vector<cplx> dark;               // <B_1>, N >= 2 only
    std::vector<double> photon_number;
    std::vector<double> top_photon_population;
    std::vector<std::vector<std::vector<double>>> populations; // [well][nu][sample]

    double max_trace_error{0.0};
    double max_hermiticity_error{0.0};
    double min_eigenvalue{0.0};
    std::vector<DensityMatrix> checkpoints;
    OdeStats stats;

    double time(std::size_t k) const noexcept { return t_start + static_cast<double>(k) * dt; }
    std::vector<double> times() const;
    std::vector<cplx> field_series(Frame frame) const;
    std::vector<cplx> bright_series(Frame frame) const;
};

// Throws SolverError on photon truncation overflow, ValidationError on a
// positivity violation beyond positivity_abort.
LindbladSeries evolve(const SystemConfig& cfg, const HilbertConfig& h, const LindbladOptions& options = {});

// P_2(t) of one well.
std::vector<double> second_level_population(const LindbladSeries& series, std::size_t well = 0);

struct ConvergedLindblad {
    LindbladSeries series;
    std::vector<std::pair<int, double>> history; // (n_photon_max, metric)
    bool converged{false};
};

// Raises n_photon_max in steps of 2 until the metric moves by less than rel_tol
// (or 1e-6 absolute) between consecutive truncations.
ConvergedLindblad evolve_converged(const SystemConfig& cfg, HilbertConfig h, const LindbladOptions& options,
                                   const std::function<double(const LindbladSeries&)>& metric,
                                   double rel_tol = 0.01, int max_raises = 4);

// Binary checkpoint: uint64 little-endian header length, JSON header, then
// dim*dim row-major (re, im) float64 little-endian pairs.
void write_density_matrix(const std::string& path, const DensityMatrix& rho, const HilbertConfig& h);
DensityMatrix read_density_matrix(const std::string& path);

} // namespace kerrcav
