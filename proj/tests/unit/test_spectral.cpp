#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kerrcav/errors.hpp"
#include "kerrcav/meanfield.hpp"
#include "kerrcav/presets.hpp"
#include "kerrcav/spectral.hpp"

using namespace kerrcav;

namespace {

constexpr double kPi = std::numbers::pi;

// Lab-frame decaying oscillation exp(-i w t - G t / 2) starting at t0.
FidWindow lorentzian(double w, double rate, double t0 = 1.0, double phase = 0.0, double span = 40.0, double dt = 0.004) {
    FidWindow win;
    win.t_off = t0;
    win.dt = dt;
    win.omega_ref = w;
    win.linewidth = rate;
    const auto n = static_cast<std::size_t>(span / (rate * dt));
    for (std::size_t k = 0; k < n; ++k) {
        const double t = t0 + static_cast<double>(k) * dt;
        win.samples.push_back(std::polar(std::exp(-0.5 * rate * (t - t0)), phase - w * t));
    }
    return win;
}

double fwhm(const Spectrum& s) {
    std::vector<double> p(s.values.size());
    for (std::size_t j = 0; j < p.size(); ++j) p[j] = std::norm(s.values[j]);
    const auto peak = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    const double half = 0.5 * p[peak];
    auto cross = [&](int dir) {
        std::size_t j = peak;
        while (p[j] > half) j = static_cast<std::size_t>(static_cast<long>(j) + dir);
        const std::size_t i = static_cast<std::size_t>(static_cast<long>(j) - dir);
        const double f = (half - p[i]) / (p[j] - p[i]);
        return s.omega[i] + f * (s.omega[j] - s.omega[i]);
    };
    return cross(1) - cross(-1);
}

SystemConfig driven(double u_over_gamma, double f0_over_kappa) {
    SystemConfig cfg = reference_config(u_over_gamma);
    cfg.pulse.amplitude = f0_over_kappa * cfg.cavity.kappa;
    return cfg;
}

double meanfield_phase(const SystemConfig& cfg, BaselineMode mode, SignalSource source = SignalSource::Cavity) {
    const auto run = integrate(cfg);
    const auto base = integrate(baseline_config(cfg, mode));
    return nonlinear_phase(fid_window(run, source), fid_window(base, source));
}

} // namespace

TEST_CASE("FID window placement") {
    const SystemConfig cfg = reference_config(0.5);
    const double dt = default_sample_spacing(cfg);
    const std::vector<cplx> series(static_cast<std::size_t>(30.0 / dt), cplx{1.0, 0.0});
    CHECK(fid_start(cfg) == doctest::Approx(1.065));
    const auto w = fid_window(series, 0.0, dt, cfg, SignalSource::Cavity);
    CHECK(w.t_off >= 1.065 - 1e-12);
    CHECK(w.t_off < 1.065 + dt);
    CHECK(w.omega_ref == 40.0);
    CHECK(w.linewidth == doctest::Approx(0.9333).epsilon(1e-4));

    FidPolicy early;
    early.offset_durations = 1.0;
    CHECK_THROWS_AS(fid_window(series, 0.0, dt, cfg, SignalSource::Cavity, early), ConfigError);
    FidPolicy late;
    late.t_off = 100.0;
    CHECK_THROWS_AS(fid_window(series, 0.0, dt, cfg, SignalSource::Cavity, late), ValidationError);
    const std::vector<cplx> short_series(static_cast<std::size_t>(4.0 / dt), cplx{});
    CHECK_THROWS_AS(fid_window(short_series, 0.0, dt, cfg, SignalSource::Cavity), ValidationError);
    CHECK_THROWS_AS(fid_window(std::vector<cplx>{}, 0.0, dt, cfg, SignalSource::Cavity), ValidationError);
}

TEST_CASE("Lorentzian line shape") {
    for (double rate : {0.5, 0.9333, 2.0}) {
        const auto s = fourier(lorentzian(40.0, rate));
        CHECK(fwhm(s) == doctest::Approx(rate).epsilon(0.02));
        // Peak value of the analytic transform: 1 / (sqrt(2 pi) G/2), up to the start-time phase.
        const auto mid = s.values.size() / 2;
        CHECK(std::abs(s.values[mid]) == doctest::Approx(2.0 / (rate * std::sqrt(2 * kPi))).epsilon(0.01));
        CHECK(s.omega[mid] == doctest::Approx(40.0));
        CHECK(s.omega.back() - s.omega.front() == doctest::Approx(20.0 * rate).epsilon(0.01));
    }
}

TEST_CASE("undersampled windows are rejected") {
    const auto w = lorentzian(40.0, 0.9333, 1.0, 0.0, 40.0, 0.08);
    CHECK_THROWS_AS(fourier(w), ValidationError);
}

TEST_CASE("four-quadrant phase and masking") {
    Spectrum s;
    s.omega = {1.0, 2.0, 3.0, 4.0, 5.0};
    s.values = {{1.0, 1.0}, {-1.0, 1.0}, {1e-20, 0.0}, {-1.0, -1.0}, {1.0, -1.0}};
    const auto p = phase_spectrum(s);
    CHECK(p.raw_phase[0] == doctest::Approx(kPi / 4));
    CHECK(p.raw_phase[1] == doctest::Approx(3 * kPi / 4));
    CHECK(p.raw_phase[3] == doctest::Approx(-3 * kPi / 4));
    CHECK(p.raw_phase[4] == doctest::Approx(-kPi / 4));
    CHECK_FALSE(p.valid[2]);
    CHECK(std::isnan(p.phase[2]));
    CHECK(p.valid[0]);
    CHECK(p.phase[1] - p.phase[0] == doctest::Approx(kPi / 2));
    // Unwrapping carries the branch across the masked bin.
    CHECK(p.phase[3] == doctest::Approx(5 * kPi / 4));
    CHECK(p.phase[4] == doctest::Approx(7 * kPi / 4));
    CHECK(phase_at(p, 1.5) == doctest::Approx(kPi / 2));
    CHECK_THROWS_AS(phase_at(p, 2.5), ValidationError);
    CHECK_THROWS_AS(phase_at(p, 9.0), ValidationError);
}

TEST_CASE("constant phase offsets") {
    const auto base = phase_spectrum(fourier(lorentzian(40.0, 0.9333)));
    const auto shifted = phase_spectrum(fourier(lorentzian(40.0, 0.9333, 1.0, 0.3)));
    const auto rel = relative_phase(shifted, base);
    CHECK(rel.at_reference == doctest::Approx(0.3).epsilon(1e-9));
    for (std::size_t j = 0; j < rel.delta.size(); ++j)
        if (!std::isnan(rel.delta[j])) CHECK(rel.delta[j] == doctest::Approx(0.3).epsilon(1e-9));

    const auto self = relative_phase(base, base);
    CHECK(self.at_reference == 0.0);

    // Shifting both windows leaves their difference alone.
    const auto a = lorentzian(40.0, 0.9333, 1.0, 0.1);
    auto b = lorentzian(40.0, 0.7, 1.0, 0.1);
    const auto a2 = lorentzian(40.0, 0.9333, 1.0, 1.4);
    auto b2 = lorentzian(40.0, 0.7, 1.0, 1.4);
    b2.linewidth = b.linewidth = 0.9333;
    CHECK(nonlinear_phase(a2, b2) == doctest::Approx(nonlinear_phase(a, b)).epsilon(1e-9));

    auto other = lorentzian(40.0, 0.9333);
    other.linewidth = 0.5;
    CHECK_THROWS_AS(relative_phase(phase_spectrum(fourier(other)), base), ValidationError);
}

TEST_CASE("time translation adds omega tau") {
    const double tau = 0.01;
    auto w = lorentzian(40.0, 0.9333);
    auto moved = w;
    moved.t_off += tau;
    const auto rel = relative_phase(phase_spectrum(fourier(moved)), phase_spectrum(fourier(w)));
    for (std::size_t j = 0; j < rel.omega.size(); ++j)
        CHECK(rel.delta[j] == doctest::Approx(rel.omega[j] * tau).epsilon(1e-9));
    CHECK(rel.at_reference == doctest::Approx(40.0 * tau));

    auto other = lorentzian(40.0, 0.7);
    other.linewidth = 0.9333;
    auto other_moved = other;
    other_moved.t_off += tau;
    CHECK(nonlinear_phase(moved, other_moved) == doctest::Approx(nonlinear_phase(w, other)).epsilon(1e-9));
}

TEST_CASE("alpha fit") {
    const SystemConfig cfg = reference_config(0.5);
    const double gt = reference_linewidth(cfg);
    const double u = cfg.dipoles[0].anharmonicity;
    std::vector<std::pair<double, double>> pts;
    for (int i = 1; i <= 10; ++i) {
        const double x = 0.02 * i;
        pts.emplace_back(x, 3.5 * (2 * u / (2 * gt)) * x * x);
    }
    const auto r = fit_alpha(pts, cfg);
    CHECK(r.alpha == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(r.exponent == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.relative_residual < 1e-12);
    CHECK_FALSE(r.regime_breakdown);
    CHECK(r.used == 10);

    FitOptions narrow;
    narrow.x_max = 0.07;
    CHECK_THROWS_AS(fit_alpha(pts, cfg, narrow), ValidationError);
    CHECK_THROWS_AS(fit_alpha(pts, reference_config(0.0)), ConfigError);

    // Saturating data is flagged.
    std::vector<std::pair<double, double>> sat;
    for (const auto& [x, y] : pts) sat.emplace_back(x, 0.01 * std::tanh(100.0 * x * x));
    const auto rs = fit_alpha(sat, cfg);
    CHECK(rs.exponent < 1.9);

    std::vector<std::pair<double, double>> bent;
    for (const auto& [x, y] : pts) bent.emplace_back(x, x < 0.1 ? y : 0.0);
    CHECK(fit_alpha(bent, cfg).regime_breakdown);
}

TEST_CASE("quadratic law arithmetic") {
    // alpha = 3.5, gamma_tilde = 0.9333, N = 2, F0/kappa = 0.2.
    const SystemConfig cfg = reference_config(1.0);
    const double gt = reference_linewidth(cfg);
    CHECK(gt == doctest::Approx(0.9333).epsilon(1e-4));
    const double predicted = 3.5 * (2 * cfg.dipoles[0].anharmonicity / (2 * gt)) * 0.04;
    CHECK(predicted == doctest::Approx(0.090).epsilon(0.01));
}

TEST_CASE("baselines") {
    CHECK(parse_baseline("weak") == BaselineMode::WeakDrive);
    CHECK(baseline_name(BaselineMode::Harmonic) == "harmonic");
    CHECK_THROWS_AS(parse_baseline("linear"), ConfigError);
    const auto cfg = driven(0.5, 0.2);
    CHECK(baseline_config(cfg, BaselineMode::Harmonic).dipoles[1].anharmonicity == 0.0);
    CHECK(baseline_config(cfg, BaselineMode::WeakDrive).pulse.amplitude == doctest::Approx(0.12));

    const double harmonic = meanfield_phase(cfg, BaselineMode::Harmonic);
    const double weak = meanfield_phase(cfg, BaselineMode::WeakDrive);
    CHECK(harmonic > 0.0);
    CHECK(std::abs(harmonic - weak) <= 0.05 * std::abs(harmonic));

    CHECK(std::abs(meanfield_phase(driven(0.0, 0.2), BaselineMode::WeakDrive)) < 1e-3);
    CHECK(std::abs(meanfield_phase(driven(0.0, 0.2), BaselineMode::Harmonic)) < 1e-12);
    CHECK(meanfield_phase(driven(1.0, 0.2), BaselineMode::Harmonic) > harmonic);
}

TEST_CASE("cavity and dipole phases agree") {
    auto equivalence = [](double u, double f) {
        const auto cfg = driven(u, f);
        const auto run = integrate(cfg);
        const auto base = integrate(baseline_config(cfg, BaselineMode::Harmonic));
        return dipole_phase_equivalence(fid_window(run, SignalSource::Cavity), fid_window(run, SignalSource::Dipole),
                                        fid_window(base, SignalSource::Cavity), fid_window(base, SignalSource::Dipole));
    };
    const auto harmonic = equivalence(0.0, 0.2);
    CHECK(std::abs(harmonic.cavity) < 1e-12);
    CHECK(std::abs(harmonic.dipole) < 1e-12);

    const auto e = equivalence(0.5, 0.2);
    CHECK(std::abs(e.difference) < 0.01);
    CHECK(e.difference == doctest::Approx(e.cavity - e.dipole));
    for (double f : {0.02, 0.1}) CHECK(equivalence(0.5, f).filter_phase == doctest::Approx(e.filter_phase).epsilon(0.01));
}

TEST_CASE("carrier extrema") {
    const double w = 40.0, dt = 0.002;
    std::vector<cplx> r(2000, cplx{1.0, 0.0});
    const auto ex = carrier_extrema(r, 0.0, dt, w);
    REQUIRE(ex.times.size() > 10);
    for (std::size_t i = 0; i < ex.times.size(); ++i) {
        const double period = ex.kind[i] > 0 ? 0.0 : kPi / w;
        const double m = std::remainder(ex.times[i] - period, 2 * kPi / w);
        CHECK(std::abs(m) < 1e-8);
        CHECK(std::abs(ex.values[i]) == doctest::Approx(1.0));
    }
}

TEST_CASE("time delay") {
    const double w = 40.0, dt = 0.002;
    std::vector<cplx> weak(3000), strong(3000);
    const double phase = 0.05;
    for (std::size_t k = 0; k < weak.size(); ++k) {
        weak[k] = {1.0, 0.0};
        strong[k] = std::polar(2.0, phase);
    }
    const auto same = time_delay(weak, weak, 0.0, dt, w);
    REQUIRE_FALSE(same.delays.empty());
    for (double d : same.delays) CHECK(d == 0.0);
    // A constant phase phi in the rotating frame shifts Re[R e^{-i w t}] extrema by phi / w.
    const auto shifted = time_delay(strong, weak, 0.0, dt, w);
    for (double d : shifted.delays) CHECK(d == doctest::Approx(phase / w).epsilon(1e-6));

    CHECK_THROWS_AS(time_delay(strong, std::span<const cplx>(weak).first(10), 0.0, dt, w), ValidationError);
    CHECK_THROWS_AS(time_delay(strong, weak, 0.0, 0.1, w), ValidationError);

    const auto cfg = driven(1.0, 0.2);
    const auto traj = integrate(cfg);
    const auto d = time_delay(traj, traj);
    for (double v : d.delays) CHECK(v == 0.0);
    auto other = cfg;
    other.cavity.kappa = 11.0;
    CHECK_THROWS_AS(time_delay(traj, integrate(other)), ValidationError);
}

TEST_CASE("asymptotic delay matches the stationary phase") {
    PostPulseOracle o;
    o.B_off = 1.2;
    o.t_off = 1.0;
    o.gamma_tilde = 0.9333;
    o.U = 0.3;
    o.N = 2;
    auto weak_o = o;
    weak_o.B_off = 0.05;
    const double dt = 0.002;
    std::vector<cplx> strong, weak;
    for (double t = o.t_off; t < o.t_off + 15.0 / o.gamma_tilde; t += dt) {
        strong.push_back(post_pulse_analytic(o, t));
        weak.push_back(post_pulse_analytic(weak_o, t));
    }
    const auto d = time_delay(strong, weak, o.t_off, dt, 40.0);
    REQUIRE(d.delays.size() > 10);
    const double expect = (stationary_phase(o) - stationary_phase(weak_o)) / 40.0;
    CHECK(d.delays.back() == doctest::Approx(expect).epsilon(0.05));
}
