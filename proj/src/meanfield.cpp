#include "kerrcav/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <numbers>
#include <sstream>

#include "kerrcav/errors.hpp"

namespace kerrcav {
namespace {

constexpr cplx kI{0.0, 1.0};
const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

std::size_t mode_count(MeanFieldModel m) { return m == MeanFieldModel::Identical ? 1 : 2; }

Representation representation_of(MeanFieldModel m) {
    return m == MeanFieldModel::TwoWellLocal ? Representation::Local : Representation::Collective;
}

void require_two_wells(const SystemConfig& cfg) {
    if (cfg.size() != 2) throw ConfigError("the two-well model needs exactly 2 dipoles");
}

void require_collective_form(const SystemConfig& cfg) {
    require_two_wells(cfg);
    const auto& d1 = cfg.dipoles[0];
    const auto& d2 = cfg.dipoles[1];
    if (d1.anharmonicity != d2.anharmonicity || d1.coupling != d2.coupling)
        throw ConfigError("the bright/dark form needs equal U and g in both wells; use the local form");
}

void rhs_flat_identical(const SystemConfig& cfg, double t, const cplx* y, cplx* dy) {
    const auto& d = cfg.dipoles.front();
    const double w = frame_offset(cfg);
    const double n = static_cast<double>(cfg.size());
    const double big_g = cfg.collective_coupling();
    const cplx f = drive_amplitude(t, cfg.pulse, cfg.frame);
    const cplx a = y[0];
    const cplx b0 = y[1];
    dy[0] = -cplx{0.5 * cfg.cavity.kappa, cfg.cavity.omega_c - w} * a - kI * big_g * b0 - kI * f;
    dy[1] = -cplx{0.5 * d.gamma, d.omega - w} * b0 + kI * (2.0 * d.anharmonicity / n) * std::norm(b0) * b0 -
            kI * big_g * a;
}

void rhs_flat_local(const SystemConfig& cfg, double t, const cplx* y, cplx* dy) {
    const double w = frame_offset(cfg);
    const cplx f = drive_amplitude(t, cfg.pulse, cfg.frame);
    const cplx a = y[0];
    cplx da = -cplx{0.5 * cfg.cavity.kappa, cfg.cavity.omega_c - w} * a - kI * f;
    for (std::size_t n = 0; n < 2; ++n) {
        const auto& d = cfg.dipoles[n];
        const cplx b = y[1 + n];
        da -= kI * d.coupling * b;
        dy[1 + n] = -cplx{0.5 * d.gamma, d.omega - w} * b - kI * d.coupling * a +
                    2.0 * kI * d.anharmonicity * std::norm(b) * b;
    }
    dy[0] = da;
}

void rhs_flat_collective(const SystemConfig& cfg, double t, const cplx* y, cplx* dy) {
    const double w = frame_offset(cfg);
    const auto& d1 = cfg.dipoles[0];
    const auto& d2 = cfg.dipoles[1];
    const double u = d1.anharmonicity;
    const double g2 = std::numbers::sqrt2 * d1.coupling;
    const double gamma_bar = 0.5 * (d1.gamma + d2.gamma);
    const double omega_bar = 0.5 * (d1.omega + d2.omega) - w;
    const double d_gamma = 0.5 * (d2.gamma - d1.gamma);
    const double d_omega = 0.5 * (d2.omega - d1.omega);
    const cplx f = drive_amplitude(t, cfg.pulse, cfg.frame);
    const cplx a = y[0];
    const cplx b0 = y[1];
    const cplx b1 = y[2];
    const double omega_t = omega_bar - u * (std::norm(b0) + std::norm(b1));
    const double d_omega_t = d_omega - 2.0 * u * std::real(std::conj(b0) * b1);
    const cplx self{0.5 * gamma_bar, omega_t};
    const cplx cross{0.5 * d_gamma, d_omega_t};
    dy[0] = -cplx{0.5 * cfg.cavity.kappa, cfg.cavity.omega_c - w} * a - kI * g2 * b0 - kI * f;
    dy[1] = -self * b0 - cross * b1 - kI * g2 * a;
    dy[2] = -self * b1 - cross * b0;
}

using FlatRhs = void (*)(const SystemConfig&, double, const cplx*, cplx*);

FlatRhs flat_rhs(MeanFieldModel m) {
    switch (m) {
    case MeanFieldModel::Identical: return rhs_flat_identical;
    case MeanFieldModel::TwoWellLocal: return rhs_flat_local;
    case MeanFieldModel::TwoWellCollective: return rhs_flat_collective;
    }
    return rhs_flat_identical;
}

void check_model(const SystemConfig& cfg, MeanFieldModel m) {
    switch (m) {
    case MeanFieldModel::Identical:
        if (!cfg.homogeneous()) throw ConfigError("the identical-dipole model needs a homogeneous dipole set");
        break;
    case MeanFieldModel::TwoWellLocal: require_two_wells(cfg); break;
    case MeanFieldModel::TwoWellCollective: require_collective_form(cfg); break;
    }
}

MeanFieldState from_flat(const cplx* y, std::size_t modes, Representation rep) {
    MeanFieldState s;
    s.a = y[0];
    s.modes.assign(y + 1, y + 1 + modes);
    s.representation = rep;
    return s;
}

std::vector<cplx> to_flat(const MeanFieldState& s) {
    std::vector<cplx> y;
    y.reserve(1 + s.modes.size());
    y.push_back(s.a);
    y.insert(y.end(), s.modes.begin(), s.modes.end());
    return y;
}

} // namespace

std::string model_name(MeanFieldModel m) {
    switch (m) {
    case MeanFieldModel::Identical: return "identical";
    case MeanFieldModel::TwoWellLocal: return "two-well-local";
    case MeanFieldModel::TwoWellCollective: return "two-well-collective";
    }
    return "identical";
}

MeanFieldModel parse_model(std::string_view name) {
    if (name == "identical") return MeanFieldModel::Identical;
    if (name == "two-well-local") return MeanFieldModel::TwoWellLocal;
    if (name == "two-well-collective") return MeanFieldModel::TwoWellCollective;
    throw ConfigError("unknown mean-field model '" + std::string(name) + "'");
}

MeanFieldModel default_model(const SystemConfig& cfg) {
    if (cfg.homogeneous()) return MeanFieldModel::Identical;
    if (cfg.size() == 2) return MeanFieldModel::TwoWellLocal;
    throw ConfigError("inhomogeneous mean-field dynamics is only modelled for two wells");
}

MeanFieldState vacuum_state(MeanFieldModel model) {
    MeanFieldState s;
    s.modes.assign(mode_count(model), cplx{});
    s.representation = representation_of(model);
    return s;
}

MeanFieldState rhs_identical(const MeanFieldState& s, double t, const SystemConfig& cfg) {
    check_model(cfg, MeanFieldModel::Identical);
    if (s.modes.size() != 1) throw ConfigError("identical-dipole state carries exactly one mode");
    const auto y = to_flat(s);
    cplx dy[2];
    rhs_flat_identical(cfg, t, y.data(), dy);
    return from_flat(dy, 1, Representation::Collective);
}

MeanFieldState rhs_two_well(const MeanFieldState& s, double t, const SystemConfig& cfg) {
    require_two_wells(cfg);
    if (s.modes.size() != 2) throw ConfigError("two-well state carries exactly two modes");
    const auto y = to_flat(s);
    cplx dy[3];
    if (s.representation == Representation::Local) {
        rhs_flat_local(cfg, t, y.data(), dy);
    } else {
        require_collective_form(cfg);
        rhs_flat_collective(cfg, t, y.data(), dy);
    }
    return from_flat(dy, 2, s.representation);
}

double frame_offset(const SystemConfig& cfg) {
    return cfg.frame == Frame::RotatingAtDrive ? cfg.pulse.carrier : 0.0;
}

cplx to_lab(cplx stored, double t, const SystemConfig& cfg) {
    if (cfg.frame == Frame::Lab) return stored;
    return stored * std::polar(1.0, -cfg.pulse.carrier * t);
}

cplx to_rotating(cplx stored, double t, const SystemConfig& cfg) {
    if (cfg.frame == Frame::RotatingAtDrive) return stored;
    return stored * std::polar(1.0, cfg.pulse.carrier * t);
}

double default_sample_spacing(const SystemConfig& cfg) {
    double omega_max = std::max(std::abs(cfg.cavity.omega_c), std::abs(cfg.pulse.carrier));
    double gamma_max = 0.0;
    for (const auto& d : cfg.dipoles) {
        omega_max = std::max(omega_max, std::abs(d.omega));
        gamma_max = std::max(gamma_max, d.gamma);
    }
    double dt = 1.0 / (20.0 * std::max(cfg.cavity.kappa, gamma_max));
    if (omega_max > 0.0) dt = std::min(dt, 2.0 * std::numbers::pi / (20.0 * omega_max));
    return dt;
}

double default_t_end(const SystemConfig& cfg) {
    return cfg.pulse.center + 3.0 * cfg.pulse.duration + 20.0 / reference_linewidth(cfg);
}

MeanFieldTrajectory::MeanFieldTrajectory(SystemConfig cfg, MeanFieldModel model, double t_start, double dt,
                                         std::size_t samples, std::vector<cplx> data, OdeStats stats)
    : cfg_(std::move(cfg)), model_(model), t_start_(t_start), dt_(dt), samples_(samples),
      width_(1 + kerrcav::mode_count(model)), data_(std::move(data)), stats_(stats) {
    if (!(dt_ > 0.0)) throw ValidationError("trajectory grid must be strictly increasing");
    if (data_.size() != samples_ * width_) throw ValidationError("trajectory data has the wrong size");
}

Representation MeanFieldTrajectory::representation() const noexcept { return representation_of(model_); }

std::vector<double> MeanFieldTrajectory::times() const {
    std::vector<double> t(samples_);
    for (std::size_t k = 0; k < samples_; ++k) t[k] = time(k);
    return t;
}

MeanFieldState MeanFieldTrajectory::state(std::size_t k) const {
    return from_flat(&data_[k * width_], width_ - 1, representation());
}

cplx MeanFieldTrajectory::bright(std::size_t k) const {
    if (model_ == MeanFieldModel::TwoWellLocal) return kInvSqrt2 * (mode(k, 0) + mode(k, 1));
    return mode(k, 0);
}

cplx MeanFieldTrajectory::dark(std::size_t k) const {
    switch (model_) {
    case MeanFieldModel::Identical: return {};
    case MeanFieldModel::TwoWellLocal: return kInvSqrt2 * (mode(k, 1) - mode(k, 0));
    case MeanFieldModel::TwoWellCollective: return mode(k, 1);
    }
    return {};
}

cplx MeanFieldTrajectory::convert(cplx v, std::size_t k, Frame target) const {
    if (target == cfg_.frame) return v;
    const double t = time(k);
    return target == Frame::Lab ? to_lab(v, t, cfg_) : to_rotating(v, t, cfg_);
}

std::vector<cplx> MeanFieldTrajectory::field_series(Frame frame) const {
    std::vector<cplx> out(samples_);
    for (std::size_t k = 0; k < samples_; ++k) out[k] = convert(field(k), k, frame);
    return out;
}

std::vector<cplx> MeanFieldTrajectory::bright_series(Frame frame) const {
    std::vector<cplx> out(samples_);
    for (std::size_t k = 0; k < samples_; ++k) out[k] = convert(bright(k), k, frame);
    return out;
}

std::vector<cplx> MeanFieldTrajectory::dark_series(Frame frame) const {
    std::vector<cplx> out(samples_);
    for (std::size_t k = 0; k < samples_; ++k) out[k] = convert(dark(k), k, frame);
    return out;
}

MeanFieldTrajectory integrate(const SystemConfig& cfg, const IntegrationOptions& options) {
    validate(cfg);
    const MeanFieldModel model = options.model.value_or(default_model(cfg));
    check_model(cfg, model);

    const double t_end = options.t_end > 0.0 ? options.t_end : default_t_end(cfg);
    const double dt = options.dt > 0.0 ? options.dt : default_sample_spacing(cfg);
    if (!(t_end > options.t_start)) throw ConfigError("integration interval is empty");
    const auto samples = static_cast<std::size_t>(std::floor((t_end - options.t_start) / dt + 1e-9)) + 1;

    MeanFieldState init = options.initial.value_or(vacuum_state(model));
    if (init.modes.size() != mode_count(model) || init.representation != representation_of(model))
        throw ConfigError("initial state does not match the selected model");

    OdeOptions ode = options.ode;
    if (!std::isfinite(ode.h_max)) ode.h_max = 0.5 * cfg.pulse.duration;

    const std::size_t width = 1 + mode_count(model);
    std::vector<cplx> data(samples * width);
    const FlatRhs f = flat_rhs(model);
    const auto rhs = [&cfg, f](double t, std::span<const cplx> y, std::span<cplx> dy) {
        f(cfg, t, y.data(), dy.data());
    };
    const auto observer = [&](std::size_t k, double, std::span<const cplx> y) {
        std::copy(y.begin(), y.end(), data.begin() + static_cast<std::ptrdiff_t>(k * width));
    };
    const OdeStats stats = integrate_uniform(rhs, to_flat(init), options.t_start, dt, samples, ode, observer);
    return MeanFieldTrajectory(cfg, model, options.t_start, dt, samples, std::move(data), stats);
}

std::vector<double> instantaneous_frequency(const MeanFieldTrajectory& traj) {
    if (traj.model() != MeanFieldModel::Identical)
        throw ConfigError("instantaneous frequency is defined for the identical-dipole model");
    const auto& cfg = traj.config();
    const auto& d = cfg.dipoles.front();
    const double chirp = 2.0 * d.anharmonicity / static_cast<double>(cfg.size());
    std::vector<double> w(traj.samples());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = d.omega - chirp * std::norm(traj.bright(k));
    return w;
}

bool bad_cavity_regime(const SystemConfig& cfg) {
    double gamma_max = 0.0;
    for (const auto& d : cfg.dipoles) gamma_max = std::max(gamma_max, d.gamma);
    const double kappa = cfg.cavity.kappa;
    return kappa >= 10.0 * gamma_max && (kappa - gamma_max) / 4.0 > cfg.collective_coupling();
}

cplx adiabatic_field(cplx b0, double t, const SystemConfig& cfg, std::string* warning) {
    if (!bad_cavity_regime(cfg)) {
        const std::string msg = "adiabatic elimination used outside the bad-cavity regime";
        if (warning != nullptr) {
            *warning = msg;
        } else {
            static std::once_flag once;
            std::call_once(once, [&] { std::cerr << "warning: " << msg << '\n'; });
        }
    }
    const double kappa = cfg.cavity.kappa;
    return -kI * (2.0 * cfg.collective_coupling() / kappa) * b0 -
           kI * (2.0 / kappa) * drive_amplitude(t, cfg.pulse, cfg.frame);
}

PostPulseOracle make_post_pulse_oracle(const MeanFieldTrajectory& traj, double t_off) {
    const auto& cfg = traj.config();
    if (t_off < traj.t_start() || t_off > traj.time(traj.samples() - 1))
        throw ValidationError("t_off lies outside the trajectory");
    const auto b = traj.bright_series(Frame::RotatingAtDrive);
    double peak = 0.0;
    for (const auto& z : b) peak = std::max(peak, std::abs(z));

    const auto k_off = static_cast<std::size_t>(std::llround((t_off - traj.t_start()) / traj.dt()));
    double phase = 0.0;
    bool started = false;
    for (std::size_t k = 0; k <= k_off; ++k) {
        if (std::abs(b[k]) <= 1e-12 * peak) continue;
        const double raw = std::arg(b[k]);
        if (!started) {
            phase = raw;
            started = true;
        } else {
            phase += std::remainder(raw - phase, 2.0 * std::numbers::pi);
        }
    }

    PostPulseOracle o;
    o.B_off = std::abs(b[k_off]);
    o.phi_off = phase;
    o.t_off = traj.time(k_off);
    o.gamma_tilde = purcell_rate(cfg);
    o.U = cfg.dipoles.front().anharmonicity;
    o.N = static_cast<int>(cfg.size());
    return o;
}

cplx post_pulse_analytic(const PostPulseOracle& o, double t) {
    if (t < o.t_off) throw ValidationError("the post-pulse solution needs t >= t_off");
    const double s = t - o.t_off;
    const double amp = o.B_off * std::exp(-0.5 * o.gamma_tilde * s);
    const double phi = o.phi_off + stationary_phase(o) * (1.0 - std::exp(-o.gamma_tilde * s));
    return std::polar(amp, phi);
}

cplx post_pulse_analytic_lab(const PostPulseOracle& o, double t, double omega_d) {
    return post_pulse_analytic(o, t) * std::polar(1.0, -omega_d * t);
}

double stationary_phase(const PostPulseOracle& o) {
    if (!(o.gamma_tilde > 0.0)) throw ValidationError("gamma_tilde must be positive");
    return 2.0 * o.U * o.B_off * o.B_off / (static_cast<double>(o.N) * o.gamma_tilde);
}

} // namespace kerrcav
