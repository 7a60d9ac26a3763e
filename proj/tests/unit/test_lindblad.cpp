#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <random>

#include "kerrcav/errors.hpp"
#include "kerrcav/lindblad.hpp"
#include "kerrcav/meanfield.hpp"
#include "kerrcav/presets.hpp"
#include "kerrcav/spectral.hpp"

using namespace kerrcav;

namespace {

Eigen::MatrixXcd dense(const SparseMatrix& m) { return Eigen::MatrixXcd(m); }

SystemConfig single_well(double g, double u = 0.0) {
    SystemConfig cfg = reference_config(0.0);
    cfg.dipoles.resize(1);
    cfg.dipoles[0].coupling = g;
    cfg.dipoles[0].anharmonicity = u;
    return cfg;
}

DensityMatrix random_state(std::size_t dim, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> n01;
    Eigen::MatrixXcd m(dim, dim);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = {n01(rng), n01(rng)};
    Eigen::MatrixXcd rho = m * m.adjoint();
    rho /= rho.trace();
    DensityMatrix out;
    out.dim = dim;
    out.data.resize(dim * dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) out(i, j) = rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return out;
}

double relative_l2(const std::vector<cplx>& x, const std::vector<cplx>& ref) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) {
        num += std::norm(x[k] - ref[k]);
        den += std::norm(ref[k]);
    }
    return std::sqrt(num / den);
}

} // namespace

TEST_CASE("basis indexing") {
    HilbertConfig h{3, 2, 2};
    CHECK(h.dimension() == 36);
    for (std::size_t i = 0; i < h.dimension(); ++i) REQUIRE(basis_index(h, basis_state(h, i)) == i);
    CHECK(basis_index(h, {1, {2, 0}}) == 9 + 6);
}

TEST_CASE("ladder operators on a small space") {
    HilbertConfig h{1, 1, 1};
    REQUIRE(h.dimension() == 4);
    const auto ops = build_operators(h);
    const auto a = dense(ops.a);
    // a |1, 0> = |0, 0>, a |1, 1> = |0, 1>
    CHECK(a(0, 2) == cplx(1.0));
    CHECK(a(1, 3) == cplx(1.0));
    CHECK(a.cwiseAbs().sum() == doctest::Approx(2.0));

    HilbertConfig h2{4, 2, 1};
    const auto ops2 = build_operators(h2);
    const auto a2 = dense(ops2.a);
    const auto b2 = dense(ops2.b[0]);
    CHECK(std::abs(b2(basis_index(h2, {0, {1}}), basis_index(h2, {0, {2}})) - std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(b2(basis_index(h2, {0, {0}}), basis_index(h2, {0, {1}})) - 1.0) < 1e-15);
    CHECK(std::abs(a2(basis_index(h2, {3, {1}}), basis_index(h2, {4, {1}})) - 2.0) < 1e-15);

    // [a, a^+] is the identity below the top photon level.
    const Eigen::MatrixXcd comm = a2 * a2.adjoint() - a2.adjoint() * a2;
    for (std::size_t i = 0; i < h2.dimension(); ++i) {
        const auto s = basis_state(h2, i);
        const double expect = s.photons == h2.n_photon_max ? -h2.n_photon_max : 1.0;
        CHECK(std::abs(comm(i, i) - expect) < 1e-14);
    }
    // Operators on different subsystems commute.
    const Eigen::MatrixXcd ab = a2 * b2 - b2 * a2;
    CHECK(ab.cwiseAbs().maxCoeff() < 1e-15);

    const auto flat = to_dense(ops.a);
    CHECK(flat.size() == 16);
    CHECK(flat[0 * 4 + 2] == cplx(1.0));
}

TEST_CASE("truncation guards") {
    CHECK_THROWS_AS((HilbertConfig{0, 2, 2}.validate()), ConfigError);
    CHECK_THROWS_AS((HilbertConfig{4, 0, 2}.validate()), ConfigError);
    CHECK_THROWS_AS((HilbertConfig{60, 4, 4}.validate()), ConfigError);
    CHECK_NOTHROW((HilbertConfig{8, 2, 2}.validate()));
}

TEST_CASE("Hamiltonian structure") {
    SystemConfig cfg = reference_config(1.0);
    HilbertConfig h{3, 2, 2};
    const auto lab = dense(build_hamiltonian(cfg, h, Frame::Lab));
    CHECK((lab - lab.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(std::abs(lab(0, 0)) < 1e-14);
    // 2 omega - 2U on a doubly excited well.
    CHECK(lab(basis_index(h, {0, {2, 0}}), basis_index(h, {0, {2, 0}})).real() == doctest::Approx(78.8));
    CHECK(lab(basis_index(h, {1, {0, 0}}), basis_index(h, {1, {0, 0}})).real() == doctest::Approx(40.0));
    const auto rot = dense(build_hamiltonian(cfg, h, Frame::RotatingAtDrive));
    CHECK(std::abs(rot(basis_index(h, {1, {0, 0}}), basis_index(h, {1, {0, 0}}))) < 1e-14);
    CHECK(rot(basis_index(h, {0, {2, 0}}), basis_index(h, {0, {2, 0}})).real() == doctest::Approx(-1.2));
}

TEST_CASE("resonant single excitation splits by twice the coupling") {
    const double g = 0.8;
    SystemConfig cfg = single_well(g);
    HilbertConfig h{1, 1, 1};
    const Eigen::MatrixXcd H = dense(build_hamiltonian(cfg, h, Frame::RotatingAtDrive));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    const auto ev = es.eigenvalues();
    // Spectrum {0, -g, +g, 0}: the doubly excited state |1,1> is resonant in this frame.
    std::vector<double> v(ev.data(), ev.data() + ev.size());
    std::sort(v.begin(), v.end());
    CHECK(v.front() == doctest::Approx(-g));
    CHECK(v.back() == doctest::Approx(g));
}

TEST_CASE("master-equation right-hand side") {
    HilbertConfig h{3, 2, 2};
    SystemConfig cfg = reference_config(1.0);
    const auto vac = DensityMatrix::pure(h.dimension(), 0);
    const auto d0 = lindblad_rhs(vac, 0.3, cfg, h);
    for (const auto& z : d0.data) REQUIRE(std::abs(z) < 1e-15);

    SystemConfig free = cfg;
    for (auto& d : free.dipoles) d.coupling = 0.0;
    const auto one = DensityMatrix::pure(h.dimension(), basis_index(h, {1, {0, 0}}));
    const auto d1 = lindblad_rhs(one, 0.0, free, h);
    const auto ops = build_operators(h);
    const SparseMatrix n = ops.a.adjoint() * ops.a;
    CHECK(expectation(n, d1.data, h.dimension()).real() == doctest::Approx(-12.0));

    cfg.pulse.amplitude = 2.0;
    const LindbladGenerator gen(cfg, h);
    for (unsigned seed = 1; seed <= 5; ++seed) {
        const auto rho = random_state(h.dimension(), seed);
        const double t = 0.5 + 0.02 * seed;
        const auto d = lindblad_rhs(rho, t, cfg, h);
        CHECK(std::abs(trace(d)) < 1e-12);
        CHECK(hermiticity_deviation(d) < 1e-12);

        DensityMatrix fast = rho;
        gen.apply(t, rho.data, fast.data, true);
        double diff = 0.0;
        for (std::size_t i = 0; i < fast.data.size(); ++i) diff = std::max(diff, std::abs(fast.data[i] - d.data[i]));
        CHECK(diff < 1e-12);
        CHECK(hermiticity_deviation(fast) == 0.0);
    }
}

TEST_CASE("single photon decays at the cavity rate") {
    SystemConfig cfg = single_well(0.0);
    HilbertConfig h{2, 1, 1};
    LindbladOptions o;
    o.initial = DensityMatrix::pure(h.dimension(), basis_index(h, {1, {0}}));
    o.t_end = 0.4;
    o.dt = 0.01;
    o.truncation_tolerance = 1.1;
    const auto s = evolve(cfg, h, o);
    for (std::size_t k = 0; k < s.samples; ++k) CHECK(std::abs(s.photon_number[k] - std::exp(-12.0 * s.time(k))) < 1e-6);
    CHECK(s.max_trace_error < 1e-10);
    CHECK(s.max_hermiticity_error < 1e-10);
}

TEST_CASE("photon truncation overflow is reported") {
    SystemConfig cfg = reference_config(0.5);
    cfg.pulse.amplitude = 2.0 * cfg.cavity.kappa;
    LindbladOptions o;
    o.t_end = 1.5;
    CHECK_THROWS_AS(evolve(cfg, HilbertConfig{2, 2, 2}, o), SolverError);
}

TEST_CASE("level populations") {
    SystemConfig cfg = reference_config(1.0);
    cfg.pulse.amplitude = 0.2 * cfg.cavity.kappa;
    LindbladOptions o;
    o.t_end = 2.0;
    const auto s = evolve(cfg, HilbertConfig{4, 2, 2}, o);
    const auto p2 = second_level_population(s, 1);
    REQUIRE(p2.size() == s.samples);
    for (std::size_t k = 0; k < s.samples; ++k) {
        double total = 0.0;
        for (int nu = 0; nu <= 2; ++nu) total += s.populations[0][nu][k];
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(p2[k] >= -1e-9);
    }
    CHECK_THROWS_AS(second_level_population(s, 2), ConfigError);
    const auto s1 = evolve(cfg, HilbertConfig{4, 1, 2}, o);
    CHECK_THROWS_AS(second_level_population(s1), ConfigError);
    CHECK(s.min_eigenvalue > -1e-6);
}

TEST_CASE("density-matrix checkpoints round-trip") {
    HilbertConfig h{2, 2, 2};
    auto rho = random_state(h.dimension(), 17);
    rho.time = 1.25;
    const auto path = (std::filesystem::temp_directory_path() / "kerrcav_rho_test.bin").string();
    write_density_matrix(path, rho, h);
    const auto back = read_density_matrix(path);
    CHECK(back.dim == rho.dim);
    CHECK(back.time == rho.time);
    CHECK(back.data == rho.data);
    std::filesystem::remove(path);
    CHECK_THROWS(read_density_matrix(path));

    SystemConfig cfg = reference_config(0.5);
    cfg.pulse.amplitude = 0.1 * cfg.cavity.kappa;
    LindbladOptions o;
    o.t_end = 1.0;
    o.checkpoint_times = {0.5, 1.0};
    const auto s = evolve(cfg, HilbertConfig{3, 2, 2}, o);
    REQUIRE(s.checkpoints.size() == 2);
    CHECK(s.checkpoints[0].time == doctest::Approx(0.5));
    CHECK(std::abs(trace(s.checkpoints[1]) - 1.0) < 1e-10);
}

TEST_CASE("weak drive reproduces the mean-field field") {
    SystemConfig cfg = reference_config(1.0);
    cfg.pulse.amplitude = 0.01 * cfg.cavity.kappa;
    const auto mf = integrate(cfg);
    LindbladOptions o;
    o.t_end = mf.time(mf.samples() - 1);
    const auto lb = evolve(cfg, HilbertConfig{3, 2, 2}, o);
    REQUIRE(lb.samples == mf.samples());
    CHECK(relative_l2(lb.field, mf.field_series(Frame::RotatingAtDrive)) < 0.05);
    CHECK(relative_l2(lb.bright, mf.bright_series(Frame::RotatingAtDrive)) < 0.05);
}

TEST_CASE("linear response carries no nonlinear phase") {
    SystemConfig cfg = reference_config(1.0);
    cfg.pulse.amplitude = 0.01 * cfg.cavity.kappa;
    const HilbertConfig h{3, 2, 2};
    const auto run = evolve(cfg, h);
    const auto base = evolve(baseline_config(cfg, BaselineMode::Harmonic), h);
    const double dphi = nonlinear_phase(fid_window(run, SignalSource::Cavity), fid_window(base, SignalSource::Cavity));
    CHECK(std::abs(dphi) < 1e-3);
}

TEST_CASE("photon truncation is converged at the default cutoff") {
    SystemConfig cfg = reference_config(0.5);
    cfg.pulse.amplitude = 0.2 * cfg.cavity.kappa;
    const auto base = evolve(baseline_config(cfg, BaselineMode::Harmonic), HilbertConfig{8, 2, 2});
    const auto bw = fid_window(base, SignalSource::Cavity);
    const auto r8 = evolve(cfg, HilbertConfig{8, 2, 2});
    const auto r10 = evolve(cfg, HilbertConfig{10, 2, 2});
    const double p8 = nonlinear_phase(fid_window(r8, SignalSource::Cavity), bw);
    const double p10 = nonlinear_phase(fid_window(r10, SignalSource::Cavity), bw);
    CHECK(std::abs(p8 - p10) <= 0.01 * std::abs(p10));
    CHECK(relative_l2(r8.field, r10.field) < 0.01);
}
