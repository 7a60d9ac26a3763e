#include "kerrcav/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "kerrcav/errors.hpp"
#include "kerrcav/kernels.hpp"
#include "kerrcav/lindblad.hpp"
#include "kerrcav/meanfield.hpp"

namespace kerrcav {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Cubic Lagrange interpolation of a uniformly sampled complex series.
class CubicSeries {
public:
    CubicSeries(std::span<const cplx> y, double t0, double dt) : y_(y), t0_(t0), dt_(dt) {}

    // Value and time derivative at t.
    std::pair<cplx, cplx> eval(double t) const {
        const double u = (t - t0_) / dt_;
        const auto last = static_cast<std::ptrdiff_t>(y_.size()) - 1;
        auto base = static_cast<std::ptrdiff_t>(std::floor(u)) - 1;
        base = std::clamp<std::ptrdiff_t>(base, 0, std::max<std::ptrdiff_t>(0, last - 3));
        const double s = u - static_cast<double>(base);
        // Nodes at s = 0, 1, 2, 3.
        const double l0 = -(s - 1) * (s - 2) * (s - 3) / 6.0;
        const double l1 = s * (s - 2) * (s - 3) / 2.0;
        const double l2 = -s * (s - 1) * (s - 3) / 2.0;
        const double l3 = s * (s - 1) * (s - 2) / 6.0;
        const double d0 = -((s - 2) * (s - 3) + (s - 1) * (s - 3) + (s - 1) * (s - 2)) / 6.0;
        const double d1 = ((s - 2) * (s - 3) + s * (s - 3) + s * (s - 2)) / 2.0;
        const double d2 = -((s - 1) * (s - 3) + s * (s - 3) + s * (s - 1)) / 2.0;
        const double d3 = ((s - 1) * (s - 2) + s * (s - 2) + s * (s - 1)) / 6.0;
        const cplx* p = y_.data() + base;
        const cplx v = l0 * p[0] + l1 * p[1] + l2 * p[2] + l3 * p[3];
        const cplx d = (d0 * p[0] + d1 * p[1] + d2 * p[2] + d3 * p[3]) / dt_;
        return {v, d};
    }

private:
    std::span<const cplx> y_;
    double t0_;
    double dt_;
};

double wrap(double x) { return std::remainder(x, kTwoPi); }

} // namespace

std::string source_name(SignalSource s) { return s == SignalSource::Cavity ? "cavity" : "dipole"; }

double fid_start(const SystemConfig& cfg, const FidPolicy& policy) {
    return policy.t_off.value_or(cfg.pulse.center + policy.offset_durations * cfg.pulse.duration);
}

FidWindow fid_window(std::span<const cplx> series, double t_start, double dt, const SystemConfig& cfg,
                     SignalSource source, const FidPolicy& policy) {
    if (series.empty() || !(dt > 0.0)) throw ValidationError("empty or unsampled series");
    const double t_off = fid_start(cfg, policy);
    const double kf = std::ceil((t_off - t_start) / dt - 1e-9);
    if (kf < 0.0 || kf >= static_cast<double>(series.size())) throw ValidationError("t_off lies outside the series");
    const auto k0 = static_cast<std::size_t>(kf);
    const double t_first = t_start + static_cast<double>(k0) * dt;
    if (envelope(t_first, cfg.pulse) > policy.max_envelope) throw ConfigError("FID window starts while the pulse is still on");

    const double linewidth = reference_linewidth(cfg);
    const double t_last = t_start + static_cast<double>(series.size() - 1) * dt;
    if (t_last - t_first < policy.min_decay_times / linewidth) {
        std::ostringstream os;
        os << "trajectory too short: " << (t_last - t_first) << " ps past t_off, need "
           << policy.min_decay_times / linewidth;
        throw ValidationError(os.str());
    }
    FidWindow w;
    w.t_off = t_first;
    w.dt = dt;
    w.samples.assign(series.begin() + static_cast<std::ptrdiff_t>(k0), series.end());
    w.source = source;
    w.omega_ref = cfg.dipoles.front().omega;
    w.linewidth = linewidth;
    return w;
}

FidWindow fid_window(const MeanFieldTrajectory& traj, SignalSource source, const FidPolicy& policy) {
    const auto series = source == SignalSource::Cavity ? traj.field_series(Frame::Lab) : traj.bright_series(Frame::Lab);
    return fid_window(series, traj.t_start(), traj.dt(), traj.config(), source, policy);
}

FidWindow fid_window(const LindbladSeries& s, SignalSource source, const FidPolicy& policy) {
    const auto series = source == SignalSource::Cavity ? s.field_series(Frame::Lab) : s.bright_series(Frame::Lab);
    return fid_window(series, s.t_start, s.dt, s.config, source, policy);
}

Spectrum fourier(const FidWindow& w, const SpectralOptions& options) {
    const double half = options.band_linewidths * w.linewidth;
    const double step = options.resolution_linewidths * w.linewidth;
    if (!(step > 0.0) || !(half > 0.0)) throw ConfigError("spectral band and resolution must be positive");
    if (std::numbers::pi / w.dt <= w.omega_ref + half) {
        std::ostringstream os;
        os << "aliasing: Nyquist frequency " << std::numbers::pi / w.dt << " does not exceed band edge "
           << w.omega_ref + half;
        throw ValidationError(os.str());
    }
    const auto m = static_cast<std::size_t>(std::ceil(half / step));
    Spectrum s;
    s.source = w.source;
    s.omega_ref = w.omega_ref;
    s.omega.resize(2 * m + 1);
    for (std::size_t j = 0; j < s.omega.size(); ++j)
        s.omega[j] = w.omega_ref + (static_cast<double>(j) - static_cast<double>(m)) * step;
    s.values.assign(s.omega.size(), cplx{});

    const std::size_t n = w.samples.size();
    std::vector<double> weights(n, w.dt / std::sqrt(kTwoPi));
    if (n >= 2) {
        weights.front() *= 0.5;
        weights.back() *= 0.5;
    }
    kernels::dft_band(w.samples, weights, w.t_off, w.dt, s.omega, s.values);
    return s;
}

PhaseSpectrum phase_spectrum(const Spectrum& s, double noise_floor) {
    PhaseSpectrum p;
    p.omega = s.omega;
    p.source = s.source;
    p.omega_ref = s.omega_ref;
    const std::size_t n = s.values.size();
    p.magnitude.resize(n);
    p.raw_phase.resize(n);
    p.phase.assign(n, kNaN);
    p.valid.assign(n, false);
    double peak = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        p.magnitude[j] = std::abs(s.values[j]);
        p.raw_phase[j] = std::atan2(s.values[j].imag(), s.values[j].real());
        peak = std::max(peak, p.magnitude[j]);
    }
    if (!(peak > 0.0)) return p;
    bool started = false;
    double prev = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (p.magnitude[j] < noise_floor * peak) continue;
        p.valid[j] = true;
        prev = started ? prev + wrap(p.raw_phase[j] - prev) : p.raw_phase[j];
        started = true;
        p.phase[j] = prev;
    }
    return p;
}

double phase_at(const PhaseSpectrum& p, double omega) {
    if (p.omega.size() < 2 || omega < p.omega.front() || omega > p.omega.back())
        throw ValidationError("frequency outside the phase spectrum");
    auto it = std::upper_bound(p.omega.begin(), p.omega.end(), omega);
    std::size_t j = static_cast<std::size_t>(it - p.omega.begin());
    j = std::clamp<std::size_t>(j, 1, p.omega.size() - 1) - 1;
    if (!p.valid[j] || !p.valid[j + 1]) throw ValidationError("phase undefined near the requested frequency");
    const double f = (omega - p.omega[j]) / (p.omega[j + 1] - p.omega[j]);
    return p.phase[j] + f * (p.phase[j + 1] - p.phase[j]);
}

RelativePhase relative_phase(const PhaseSpectrum& run, const PhaseSpectrum& baseline) {
    if (run.omega.size() != baseline.omega.size()) throw ValidationError("phase spectra are on different grids");
    for (std::size_t j = 0; j < run.omega.size(); ++j)
        if (std::abs(run.omega[j] - baseline.omega[j]) > 1e-9 * std::max(1.0, std::abs(run.omega[j])))
            throw ValidationError("phase spectra are on different grids");
    RelativePhase r;
    r.omega = run.omega;
    const double raw = phase_at(run, run.omega_ref) - phase_at(baseline, run.omega_ref);
    // Independent unwrapping can leave a 2 pi offset between the two spectra.
    const double shift = wrap(raw) - raw;
    r.at_reference = raw + shift;
    r.delta.resize(run.omega.size());
    for (std::size_t j = 0; j < run.omega.size(); ++j)
        r.delta[j] = run.valid[j] && baseline.valid[j] ? run.phase[j] - baseline.phase[j] + shift : kNaN;
    return r;
}

double nonlinear_phase(const FidWindow& run, const FidWindow& baseline, const SpectralOptions& options) {
    return relative_phase(phase_spectrum(fourier(run, options)), phase_spectrum(fourier(baseline, options)))
        .at_reference;
}

std::string baseline_name(BaselineMode m) { return m == BaselineMode::Harmonic ? "harmonic" : "weak"; }

BaselineMode parse_baseline(std::string_view name) {
    if (name == "harmonic") return BaselineMode::Harmonic;
    if (name == "weak") return BaselineMode::WeakDrive;
    throw ConfigError("unknown baseline '" + std::string(name) + "' (expected harmonic or weak)");
}

SystemConfig baseline_config(const SystemConfig& cfg, BaselineMode mode) {
    SystemConfig b = cfg;
    if (mode == BaselineMode::Harmonic) {
        for (auto& d : b.dipoles) d.anharmonicity = 0.0;
    } else {
        b.pulse.amplitude = 0.01 * cfg.cavity.kappa;
    }
    return b;
}

PhaseEquivalence dipole_phase_equivalence(const FidWindow& run_cavity, const FidWindow& run_dipole,
                                          const FidWindow& base_cavity, const FidWindow& base_dipole,
                                          const SpectralOptions& options) {
    const auto pc = phase_spectrum(fourier(run_cavity, options));
    const auto pd = phase_spectrum(fourier(run_dipole, options));
    PhaseEquivalence e;
    e.cavity = relative_phase(pc, phase_spectrum(fourier(base_cavity, options))).at_reference;
    e.dipole = relative_phase(pd, phase_spectrum(fourier(base_dipole, options))).at_reference;
    e.difference = e.cavity - e.dipole;
    e.filter_phase = wrap(phase_at(pc, pc.omega_ref) - phase_at(pd, pd.omega_ref));
    return e;
}

NonlinearPhaseResult fit_alpha(const std::vector<std::pair<double, double>>& points, const SystemConfig& cfg,
                               const FitOptions& options) {
    NonlinearPhaseResult r;
    r.points = points;
    r.x_min = options.x_min;
    r.x_max = options.x_max;
    const double u = cfg.dipoles.front().anharmonicity;
    if (!(u > 0.0)) throw ConfigError("alpha is undefined for a harmonic system");

    double sxy = 0.0, sxx = 0.0;
    std::vector<std::pair<double, double>> used;
    for (const auto& [x, y] : points) {
        if (x < options.x_min || x > options.x_max) continue;
        used.emplace_back(x, y);
        sxy += x * x * y;
        sxx += x * x * x * x;
    }
    r.used = used.size();
    if (used.size() < options.min_points) {
        std::ostringstream os;
        os << "alpha fit needs at least " << options.min_points << " points in range, got " << used.size();
        throw ValidationError(os.str());
    }
    r.coefficient = sxy / sxx;
    r.alpha = r.coefficient * static_cast<double>(cfg.size()) * reference_linewidth(cfg) / (2.0 * u);

    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& [x, y] : used) {
        const double res = y - r.coefficient * x * x;
        r.residuals.push_back(res);
        ss_res += res * res;
        ss_tot += y * y;
    }
    r.relative_residual = ss_tot > 0.0 ? std::sqrt(ss_res / ss_tot) : 0.0;
    r.regime_breakdown = r.relative_residual > options.residual_threshold;

    double n = 0.0, sx = 0.0, sy = 0.0, sxx_l = 0.0, sxy_l = 0.0;
    for (const auto& [x, y] : used) {
        if (!(x > 0.0 && y > 0.0)) continue;
        const double lx = std::log(x), ly = std::log(y);
        n += 1.0;
        sx += lx;
        sy += ly;
        sxx_l += lx * lx;
        sxy_l += lx * ly;
    }
    const double denom = n * sxx_l - sx * sx;
    if (n >= 2.0 && denom > 0.0) {
        r.exponent = (n * sxy_l - sx * sy) / denom;
        r.prefactor = std::exp((sy - r.exponent * sx) / n);
    } else {
        r.exponent = kNaN;
        r.prefactor = kNaN;
    }
    return r;
}

Extrema carrier_extrema(std::span<const cplx> rotating, double t_start, double dt, double omega_d) {
    Extrema e;
    if (rotating.size() < 4) return e;
    const CubicSeries interp(rotating, t_start, dt);
    const auto slope = [&](double t) {
        const auto [v, d] = interp.eval(t);
        return std::real((d - cplx{0.0, omega_d} * v) * std::polar(1.0, -omega_d * t));
    };
    const double t_end = t_start + static_cast<double>(rotating.size() - 1) * dt;
    double t_prev = t_start;
    double s_prev = slope(t_prev);
    for (std::size_t k = 1; k < rotating.size(); ++k) {
        const double t = (k + 1 == rotating.size()) ? t_end : t_start + static_cast<double>(k) * dt;
        const double s = slope(t);
        if ((s_prev > 0.0 && s <= 0.0) || (s_prev < 0.0 && s >= 0.0)) {
            double lo = t_prev, hi = t, f_lo = s_prev;
            for (int it = 0; it < 80 && hi - lo > 1e-15 * std::max(1.0, std::abs(t)); ++it) {
                const double mid = 0.5 * (lo + hi);
                const double f_mid = slope(mid);
                if ((f_lo > 0.0) == (f_mid > 0.0)) {
                    lo = mid;
                    f_lo = f_mid;
                } else {
                    hi = mid;
                }
            }
            const double root = 0.5 * (lo + hi);
            if (!e.times.empty() && root - e.times.back() < 0.25 * dt) {
                t_prev = t;
                s_prev = s;
                continue;
            }
            e.times.push_back(root);
            e.kind.push_back(s_prev > 0.0 ? 1 : -1);
            e.values.push_back(std::real(interp.eval(root).first * std::polar(1.0, -omega_d * root)));
        }
        t_prev = t;
        s_prev = s;
    }
    return e;
}

DelaySeries time_delay(std::span<const cplx> strong_rotating, std::span<const cplx> weak_rotating, double t_start,
                       double dt, double omega_d) {
    if (strong_rotating.size() != weak_rotating.size()) throw ValidationError("delay traces differ in length");
    if (!(omega_d > 0.0)) throw ConfigError("time delay needs a positive carrier");
    if (std::numbers::pi / dt <= omega_d) throw ValidationError("the grid does not resolve the carrier");
    const Extrema weak = carrier_extrema(weak_rotating, t_start, dt, omega_d);
    const Extrema strong = carrier_extrema(strong_rotating, t_start, dt, omega_d);
    double peak = 0.0;
    for (double v : weak.values) peak = std::max(peak, std::abs(v));
    const double window = std::numbers::pi / omega_d;

    DelaySeries d;
    for (std::size_t i = 0; i < weak.times.size(); ++i) {
        if (std::abs(weak.values[i]) < 1e-6 * peak) continue;
        const double t = weak.times[i];
        const auto it = std::lower_bound(strong.times.begin(), strong.times.end(), t - window);
        double best = std::numeric_limits<double>::infinity();
        for (auto j = it; j != strong.times.end() && *j <= t + window; ++j) {
            const auto idx = static_cast<std::size_t>(j - strong.times.begin());
            if (strong.kind[idx] != weak.kind[i]) continue;
            if (std::abs(*j - t) < std::abs(best)) best = *j - t;
        }
        if (!std::isfinite(best)) continue;
        d.times.push_back(t);
        d.delays.push_back(best);
        d.kind.push_back(weak.kind[i]);
    }
    return d;
}

DelaySeries time_delay(const MeanFieldTrajectory& strong, const MeanFieldTrajectory& weak) {
    if (strong.samples() != weak.samples() || strong.dt() != weak.dt() || strong.t_start() != weak.t_start())
        throw ValidationError("delay trajectories are on different grids");
    const auto& cs = strong.config();
    const auto& cw = weak.config();
    SystemConfig a = cs, b = cw;
    a.pulse.amplitude = b.pulse.amplitude = 0.0;
    if (!(a == b)) throw ValidationError("delay trajectories differ in more than the drive amplitude");
    return time_delay(strong.bright_series(Frame::RotatingAtDrive), weak.bright_series(Frame::RotatingAtDrive),
                      strong.t_start(), strong.dt(), cs.pulse.carrier);
}

} // namespace kerrcav
