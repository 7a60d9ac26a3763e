// meanfield.hpp: coherent-amplitude equations for the cavity field and dipole modes
//
// Identical wells evolve a single bright mode B0 with a Kerr chirp (2U/N)|B0|^2.
// Two inhomogeneous wells are carried either locally (b1, b2) or as the
// bright/dark pair (B0, B1); both forms are exact rewrites of each other.

#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kerrcav/model.hpp"
#include "kerrcav/ode.hpp"

namespace kerrcav {

enum class MeanFieldModel { Identical, TwoWellLocal, TwoWellCollective };
enum class Representation { Collective, Local };

std::string model_name(MeanFieldModel m);
MeanFieldModel parse_model(std::string_view name);

struct MeanFieldState {
    cplx a{};
    std::vector<cplx> modes; // (B0) | (B0, B1) | (b1, b2)
    Representation representation{Representation::Collective};
};

// Identical for homogeneous sets, two-well local for N = 2 otherwise.
MeanFieldModel default_model(const SystemConfig& cfg);
MeanFieldState vacuum_state(MeanFieldModel model);

// Right-hand sides in the frame selected by cfg.frame.
MeanFieldState rhs_identical(const MeanFieldState& s, double t, const SystemConfig& cfg);
MeanFieldState rhs_two_well(const MeanFieldState& s, double t, const SystemConfig& cfg);

// Frequency subtracted from every oscillator in the configured frame.
double frame_offset(const SystemConfig& cfg);
// Converts a stored-frame amplitude to the lab frame and back.
cplx to_lab(cplx stored, double t, const SystemConfig& cfg);
cplx to_rotating(cplx stored, double t, const SystemConfig& cfg);

// At least 20 samples per lab carrier period, per 1/kappa and per 1/gamma.
double default_sample_spacing(const SystemConfig& cfg);
// t0 + 3T plus twenty reference decay times.
double default_t_end(const SystemConfig& cfg);

struct IntegrationOptions {
    double t_start{0.0};
    double t_end{0.0}; // 0 selects default_t_end
    double dt{0.0};    // 0 selects default_sample_spacing
    OdeOptions ode{};  // h_max defaults to T/2 when left infinite
    std::optional<MeanFieldModel> model;
    std::optional<MeanFieldState> initial; // vacuum when absent
};

class MeanFieldTrajectory {
public:
    MeanFieldTrajectory(SystemConfig cfg, MeanFieldModel model, double t_start, double dt, std::size_t samples,
                        std::vector<cplx> data, OdeStats stats);

    const SystemConfig& config() const noexcept { return cfg_; }
    MeanFieldModel model() const noexcept { return model_; }
    Representation representation() const noexcept;
    Frame frame() const noexcept { return cfg_.frame; }
    std::size_t samples() const noexcept { return samples_; }
    std::size_t mode_count() const noexcept { return width_ - 1; }
    double t_start() const noexcept { return t_start_; }
    double dt() const noexcept { return dt_; }
    double time(std::size_t k) const noexcept { return t_start_ + static_cast<double>(k) * dt_; }
    std::vector<double> times() const;
    const OdeStats& stats() const noexcept { return stats_; }

    // Raw stored-frame values.
    cplx field(std::size_t k) const { return data_[k * width_]; }
    cplx mode(std::size_t k, std::size_t m) const { return data_[k * width_ + 1 + m]; }
    MeanFieldState state(std::size_t k) const;

    // Collective amplitudes regardless of the stored representation.
    cplx bright(std::size_t k) const;
    cplx dark(std::size_t k) const; // zero for the identical model

    std::vector<cplx> field_series(Frame frame) const;
    std::vector<cplx> bright_series(Frame frame) const;
    std::vector<cplx> dark_series(Frame frame) const;

private:
    cplx convert(cplx v, std::size_t k, Frame target) const;

    SystemConfig cfg_;
    MeanFieldModel model_;
    double t_start_;
    double dt_;
    std::size_t samples_;
    std::size_t width_;
    std::vector<cplx> data_;
    OdeStats stats_;
};

MeanFieldTrajectory integrate(const SystemConfig& cfg, const IntegrationOptions& options = {});

// omega0 - (2U/N)|B0|^2 on the trajectory grid (identical model only).
std::vector<double> instantaneous_frequency(const MeanFieldTrajectory& traj);

// kappa >= 10 gamma and (kappa - gamma)/4 > sqrt(N) g.
bool bad_cavity_regime(const SystemConfig& cfg);

// Field slaved to the bright mode: -i (2 sqrt(N) g / kappa) B0 - i (2/kappa) F_d(t), in cfg.frame.
// Outside the bad-cavity regime a message is stored in *warning, or printed once to stderr.
cplx adiabatic_field(cplx b0, double t, const SystemConfig& cfg, std::string* warning = nullptr);

struct PostPulseOracle {
    double B_off{0.0};
    double phi_off{0.0};
    double t_off{0.0};
    double gamma_tilde{1.0};
    double U{0.0};
    int N{1};
};

// Reads B_off and phi_off from the rotating-frame bright mode at t_off; phi_off
// is unwrapped continuously from the earlier samples.
PostPulseOracle make_post_pulse_oracle(const MeanFieldTrajectory& traj, double t_off);

// Bright-mode amplitude in the frame rotating at the drive, t >= t_off.
cplx post_pulse_analytic(const PostPulseOracle& o, double t);
// Same, carried to the lab frame with the carrier omega_d.
cplx post_pulse_analytic_lab(const PostPulseOracle& o, double t, double omega_d);

// 2 U B_off^2 / (N gamma_tilde)
double stationary_phase(const PostPulseOracle& o);

} // namespace kerrcav
