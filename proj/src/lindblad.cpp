#include "kerrcav/lindblad.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "kerrcav/errors.hpp"
#include "kerrcav/kernels.hpp"
#include "kerrcav/meanfield.hpp"

namespace kerrcav {
namespace {

constexpr cplx kI{0.0, 1.0};

void sparse_times_dense(const SparseMatrix& m, std::span<const cplx> dense, std::size_t dim, std::span<cplx> out) {
    const auto nnz = static_cast<std::size_t>(m.nonZeros());
    kernels::csr_times_dense(std::span<const int>(m.outerIndexPtr(), static_cast<std::size_t>(m.outerSize() + 1)),
                             std::span<const int>(m.innerIndexPtr(), nnz), std::span<const cplx>(m.valuePtr(), nnz),
                             dense, dim, out);
}

void adjoint_into(std::span<const cplx> src, std::span<cplx> dst, std::size_t dim) {
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) dst[j * dim + i] = std::conj(src[i * dim + j]);
}

// Replaces m by (m + m^+)/2, which is exact for real-linear combinations downstream.
void hermitize(std::span<cplx> m, std::size_t dim) {
    for (std::size_t i = 0; i < dim; ++i) {
        m[i * dim + i] = {m[i * dim + i].real(), 0.0};
        for (std::size_t j = i + 1; j < dim; ++j) {
            const cplx avg = 0.5 * (m[i * dim + j] + std::conj(m[j * dim + i]));
            m[i * dim + j] = avg;
            m[j * dim + i] = std::conj(avg);
        }
    }
}

void add_adjoint(std::span<const cplx> src, std::span<cplx> dst, std::size_t dim) {
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) dst[i * dim + j] += std::conj(src[j * dim + i]);
}

// Scatter the entries of m onto the (row_ptr, col_idx) pattern, which must contain them.
std::vector<cplx> align_to_pattern(const SparseMatrix& m, const std::vector<int>& row_ptr,
                                   const std::vector<int>& col_idx) {
    std::vector<cplx> out(col_idx.size());
    for (int r = 0; r < m.outerSize(); ++r) {
        const auto begin = col_idx.begin() + row_ptr[r];
        const auto end = col_idx.begin() + row_ptr[r + 1];
        for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
            const auto pos = std::lower_bound(begin, end, static_cast<int>(it.col()));
            out[static_cast<std::size_t>(pos - col_idx.begin())] += it.value();
        }
    }
    return out;
}

SparseMatrix adjoint(const SparseMatrix& m) {
    SparseMatrix out = m.adjoint();
    out.makeCompressed();
    return out;
}

} // namespace

DensityMatrix DensityMatrix::pure(std::size_t dim, std::size_t index) {
    DensityMatrix rho;
    rho.dim = dim;
    rho.data.assign(dim * dim, cplx{});
    rho(index, index) = 1.0;
    return rho;
}

cplx trace(const DensityMatrix& rho) {
    cplx tr{};
    for (std::size_t i = 0; i < rho.dim; ++i) tr += rho(i, i);
    return tr;
}

double hermiticity_deviation(const DensityMatrix& rho) {
    double dev = 0.0;
    for (std::size_t i = 0; i < rho.dim; ++i)
        for (std::size_t j = i; j < rho.dim; ++j) dev = std::max(dev, std::abs(rho(i, j) - std::conj(rho(j, i))));
    return dev;
}

double min_eigenvalue(const DensityMatrix& rho) {
    using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const auto n = static_cast<Eigen::Index>(rho.dim);
    Eigen::MatrixXcd m = Eigen::Map<const RowMat>(rho.data.data(), n, n);
    m = 0.5 * (m + m.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

cplx expectation(const SparseMatrix& op, std::span<const cplx> rho, std::size_t dim) {
    cplx acc{};
    for (int r = 0; r < op.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(op, r); it; ++it)
            acc += it.value() * rho[static_cast<std::size_t>(it.col()) * dim + static_cast<std::size_t>(r)];
    return acc;
}

SparseMatrix build_hamiltonian(const SystemConfig& cfg, const Operators& ops, Frame frame) {
    validate(cfg);
    if (static_cast<int>(cfg.size()) != ops.hilbert.wells)
        throw ConfigError("Hilbert space well count does not match the configuration");
    const double w = frame == Frame::RotatingAtDrive ? cfg.pulse.carrier : 0.0;
    const SparseMatrix ad = adjoint(ops.a);
    SparseMatrix h = (cfg.cavity.omega_c - w) * (ad * ops.a);
    for (std::size_t n = 0; n < cfg.size(); ++n) {
        const auto& d = cfg.dipoles[n];
        const SparseMatrix& b = ops.b[n];
        const SparseMatrix bd = adjoint(b);
        const SparseMatrix num = bd * b;
        h += (d.omega - w) * num;
        h -= d.anharmonicity * SparseMatrix(bd * num * b);
        h += d.coupling * SparseMatrix(ops.a * bd + ad * b);
    }
    h.prune(cplx{});
    h.makeCompressed();
    return h;
}

SparseMatrix build_hamiltonian(const SystemConfig& cfg, const HilbertConfig& h, Frame frame) {
    return build_hamiltonian(cfg, build_operators(h), frame);
}

LindbladGenerator::LindbladGenerator(const SystemConfig& cfg, const HilbertConfig& h)
    : cfg_(cfg), ops_(build_operators(h)), dim_(h.dimension()) {
    if (static_cast<int>(cfg.size()) != h.wells) throw ConfigError("Hilbert space well count does not match the configuration");
    const SparseMatrix ham = build_hamiltonian(cfg_, ops_, cfg_.frame);

    jumps_.push_back(std::sqrt(cfg_.cavity.kappa) * ops_.a);
    for (std::size_t n = 0; n < cfg_.size(); ++n) jumps_.push_back(std::sqrt(cfg_.dipoles[n].gamma) * ops_.b[n]);
    for (auto& l : jumps_) l.makeCompressed();

    SparseMatrix k0 = -kI * ham;
    for (const auto& l : jumps_) k0 -= 0.5 * SparseMatrix(adjoint(l) * l);
    k0.prune(cplx{});
    const SparseMatrix up = -kI * adjoint(ops_.a);
    const SparseMatrix down = -kI * ops_.a;

    // Union pattern of the three pieces.
    std::vector<Eigen::Triplet<cplx, int>> trip;
    for (const SparseMatrix* m : std::array<const SparseMatrix*, 3>{&k0, &up, &down})
        for (int r = 0; r < m->outerSize(); ++r)
            for (SparseMatrix::InnerIterator it(*m, r); it; ++it) trip.emplace_back(r, static_cast<int>(it.col()), 1.0);
    const auto d = static_cast<int>(dim_);
    SparseMatrix pattern(d, d);
    pattern.setFromTriplets(trip.begin(), trip.end());
    pattern.makeCompressed();
    row_ptr_.assign(pattern.outerIndexPtr(), pattern.outerIndexPtr() + d + 1);
    col_idx_.assign(pattern.innerIndexPtr(), pattern.innerIndexPtr() + pattern.nonZeros());
    k0_ = align_to_pattern(k0, row_ptr_, col_idx_);
    k_up_ = align_to_pattern(up, row_ptr_, col_idx_);
    k_down_ = align_to_pattern(down, row_ptr_, col_idx_);
}

void LindbladGenerator::apply(double t, std::span<const cplx> rho, std::span<cplx> drho, bool hermitian_input) const {
    const std::size_t n2 = dim_ * dim_;
    if (rho.size() != n2 || drho.size() != n2) throw SolverError("density matrix size does not match the generator");
    thread_local std::vector<cplx> vals, m, p, q;
    vals.resize(col_idx_.size());
    m.resize(n2);
    p.resize(n2);
    q.resize(n2);

    const cplx f = drive_amplitude(t, cfg_.pulse, cfg_.frame);
    const cplx fc = std::conj(f);
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = k0_[i] + f * k_up_[i] + fc * k_down_[i];
    const std::span<const int> rows(row_ptr_);
    const std::span<const int> cols(col_idx_);

    // K rho + rho K^+
    kernels::csr_times_dense(rows, cols, vals, rho, dim_, m);
    std::copy(m.begin(), m.end(), drho.begin());
    if (hermitian_input) {
        add_adjoint(m, drho, dim_);
    } else {
        adjoint_into(rho, p, dim_);
        kernels::csr_times_dense(rows, cols, vals, p, dim_, q);
        add_adjoint(q, drho, dim_);
    }
    // L rho L^+ = (L (L rho)^+)^+
    for (const auto& l : jumps_) {
        sparse_times_dense(l, rho, dim_, m);
        adjoint_into(m, p, dim_);
        sparse_times_dense(l, p, dim_, q);
        add_adjoint(q, drho, dim_);
    }
    if (hermitian_input) hermitize(drho, dim_);
}

DensityMatrix lindblad_rhs(const DensityMatrix& rho, double t, const SystemConfig& cfg, const HilbertConfig& h) {
    const LindbladGenerator gen(cfg, h);
    if (rho.dim != gen.dimension()) throw ConfigError("density matrix dimension does not match the Hilbert space");
    DensityMatrix out;
    out.dim = rho.dim;
    out.time = t;
    out.data.assign(rho.data.size(), cplx{});
    gen.apply(t, rho.data, out.data, false);
    return out;
}

std::vector<double> LindbladSeries::times() const {
    std::vector<double> t(samples);
    for (std::size_t k = 0; k < samples; ++k) t[k] = time(k);
    return t;
}

std::vector<cplx> LindbladSeries::field_series(Frame frame) const {
    std::vector<cplx> out(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        const double t = time(k);
        out[k] = frame == config.frame ? field[k]
                 : frame == Frame::Lab ? to_lab(field[k], t, config)
                                       : to_rotating(field[k], t, config);
    }
    return out;
}

std::vector<cplx> LindbladSeries::bright_series(Frame frame) const {
    std::vector<cplx> out(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        const double t = time(k);
        out[k] = frame == config.frame ? bright[k]
                 : frame == Frame::Lab ? to_lab(bright[k], t, config)
                                       : to_rotating(bright[k], t, config);
    }
    return out;
}

LindbladSeries evolve(const SystemConfig& cfg, const HilbertConfig& h, const LindbladOptions& options) {
    validate(cfg);
    h.validate();
    const LindbladGenerator gen(cfg, h);
    const std::size_t dim = gen.dimension();
    const Operators& ops = gen.operators();

    const double t_end = options.t_end > 0.0 ? options.t_end : default_t_end(cfg);
    const double dt = options.dt > 0.0 ? options.dt : default_sample_spacing(cfg);
    if (!(t_end > options.t_start)) throw ConfigError("integration interval is empty");
    const auto samples = static_cast<std::size_t>(std::floor((t_end - options.t_start) / dt + 1e-9)) + 1;

    DensityMatrix rho0 = options.initial.value_or(DensityMatrix::pure(dim, 0));
    if (rho0.dim != dim) throw ConfigError("initial density matrix has the wrong dimension");

    OdeOptions ode = options.ode;
    if (!std::isfinite(ode.h_max)) ode.h_max = 0.5 * cfg.pulse.duration;

    LindbladSeries s;
    s.config = cfg;
    s.hilbert = h;
    s.t_start = options.t_start;
    s.dt = dt;
    s.samples = samples;
    const std::size_t wells = cfg.size();
    const auto levels = static_cast<std::size_t>(h.nu_max + 1);
    s.field.resize(samples);
    s.wells.assign(wells, std::vector<cplx>(samples));
    s.bright.resize(samples);
    if (wells >= 2) s.dark.resize(samples);
    s.photon_number.resize(samples);
    s.top_photon_population.resize(samples);
    s.populations.assign(wells, std::vector<std::vector<double>>(levels, std::vector<double>(samples)));
    s.min_eigenvalue = std::numeric_limits<double>::infinity();

    std::vector<BasisState> basis(dim);
    for (std::size_t i = 0; i < dim; ++i) basis[i] = basis_state(h, i);
    const CollectiveCoefficients coeffs(wells);

    std::vector<std::size_t> checkpoint_index;
    for (double tc : options.checkpoint_times) {
        const double kf = std::round((tc - options.t_start) / dt);
        if (kf < 0.0 || kf >= static_cast<double>(samples)) throw ConfigError("checkpoint time outside the run");
        checkpoint_index.push_back(static_cast<std::size_t>(kf));
    }

    const auto observer = [&](std::size_t k, double t, std::span<const cplx> y) {
        DensityMatrix view;
        view.dim = dim;
        view.time = t;
        view.data.assign(y.begin(), y.end());

        s.max_trace_error = std::max(s.max_trace_error, std::abs(trace(view) - 1.0));
        s.max_hermiticity_error = std::max(s.max_hermiticity_error, hermiticity_deviation(view));

        s.field[k] = expectation(ops.a, y, dim);
        std::vector<cplx> local(wells);
        for (std::size_t n = 0; n < wells; ++n) local[n] = s.wells[n][k] = expectation(ops.b[n], y, dim);
        const auto coll = coeffs.to_collective(local);
        s.bright[k] = coll[0];
        if (wells >= 2) s.dark[k] = coll[1];

        double nph = 0.0;
        double top = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const double p = view(i, i).real();
            nph += basis[i].photons * p;
            if (basis[i].photons == h.n_photon_max) top += p;
            for (std::size_t n = 0; n < wells; ++n) s.populations[n][static_cast<std::size_t>(basis[i].levels[n])][k] += p;
        }
        s.photon_number[k] = nph;
        s.top_photon_population[k] = top;
        if (top > options.truncation_tolerance) {
            std::ostringstream os;
            os << "photon truncation overflow: population " << top << " in level n = " << h.n_photon_max
               << " at t = " << t << " (raise n_photon_max)";
            throw SolverError(os.str());
        }

        const bool checkpoint = std::find(checkpoint_index.begin(), checkpoint_index.end(), k) != checkpoint_index.end();
        const bool stride = options.positivity_stride > 0 && k % options.positivity_stride == 0;
        if (checkpoint || stride || k + 1 == samples) {
            const double ev = min_eigenvalue(view);
            s.min_eigenvalue = std::min(s.min_eigenvalue, ev);
            if (ev < -options.positivity_abort) {
                std::ostringstream os;
                os << "positivity violated: minimum eigenvalue " << ev << " at t = " << t << " (trace error "
                   << s.max_trace_error << ", hermiticity deviation " << s.max_hermiticity_error << ")";
                throw ValidationError(os.str());
            }
        }
        if (checkpoint) s.checkpoints.push_back(std::move(view));
    };

    const auto rhs = [&gen](double t, std::span<const cplx> y, std::span<cplx> dy) { gen.apply(t, y, dy, true); };
    s.stats = integrate_uniform(rhs, std::move(rho0.data), options.t_start, dt, samples, ode, observer);
    return s;
}

std::vector<double> second_level_population(const LindbladSeries& series, std::size_t well) {
    if (series.hilbert.nu_max < 2) throw ConfigError("P2 needs nu_max >= 2");
    if (well >= series.populations.size()) throw ConfigError("well index out of range");
    return series.populations[well][2];
}

ConvergedLindblad evolve_converged(const SystemConfig& cfg, HilbertConfig h, const LindbladOptions& options,
                                   const std::function<double(const LindbladSeries&)>& metric, double rel_tol,
                                   int max_raises) {
    ConvergedLindblad out;
    double previous = std::numeric_limits<double>::quiet_NaN();
    for (int attempt = 0; attempt <= max_raises; ++attempt, h.n_photon_max += 2) {
        LindbladSeries series;
        try {
            series = evolve(cfg, h, options);
        } catch (const SolverError&) {
            if (attempt == max_raises) throw;
            previous = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        const double value = metric(series);
        out.history.emplace_back(h.n_photon_max, value);
        const bool close = !std::isnan(previous) && std::abs(value - previous) <= std::max(rel_tol * std::abs(value), 1e-6);
        out.series = std::move(series);
        if (close) {
            out.converged = true;
            return out;
        }
        previous = value;
    }
    return out;
}

void write_density_matrix(const std::string& path, const DensityMatrix& rho, const HilbertConfig& h) {
    nlohmann::json header{{"format", "kerrcav-density-matrix"},
                          {"version", 1},
                          {"dim", rho.dim},
                          {"time", rho.time},
                          {"layout", "row-major complex128 (re, im) little-endian"},
                          {"basis", "cavity photon number slowest, then wells in order"},
                          {"n_photon_max", h.n_photon_max},
                          {"nu_max", h.nu_max},
                          {"wells", h.wells}};
    const std::string text = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    auto put_u64 = [&out](std::uint64_t v) {
        char bytes[8];
        for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
        out.write(bytes, 8);
    };
    put_u64(text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const cplx& z : rho.data) {
        put_u64(std::bit_cast<std::uint64_t>(z.real()));
        put_u64(std::bit_cast<std::uint64_t>(z.imag()));
    }
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

DensityMatrix read_density_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    auto get_u64 = [&in]() {
        unsigned char bytes[8];
        in.read(reinterpret_cast<char*>(bytes), 8);
        if (!in) throw ConfigError("truncated density-matrix file");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
        return v;
    };
    const std::uint64_t len = get_u64();
    if (len > (1u << 20)) throw ConfigError("density-matrix header is implausibly long");
    std::string text(len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    const auto header = nlohmann::json::parse(text, nullptr, false);
    if (header.is_discarded() || !header.contains("dim")) throw ConfigError("malformed density-matrix header");
    DensityMatrix rho;
    rho.dim = header.at("dim").get<std::size_t>();
    rho.time = header.value("time", 0.0);
    rho.data.resize(rho.dim * rho.dim);
    for (auto& z : rho.data) {
        const double re = std::bit_cast<double>(get_u64());
        const double im = std::bit_cast<double>(get_u64());
        z = {re, im};
    }
    return rho;
}

} // namespace kerrcav
