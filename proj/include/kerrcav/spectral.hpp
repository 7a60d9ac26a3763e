// spectral.hpp: free-induction-decay windows, phase spectra and nonlinear phase shifts
//
// Fourier convention: S(omega) = (1/sqrt(2 pi)) \int dt x(t) e^{+i omega t}, evaluated
// directly on a band |omega - omega_ref| <= 10 linewidths with trapezoid weights.

#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kerrcav/model.hpp"

namespace kerrcav {

class MeanFieldTrajectory;
struct LindbladSeries;

enum class SignalSource { Cavity, Dipole };
std::string source_name(SignalSource s);

struct FidPolicy {
    double offset_durations{3.0};  // t_off = t0 + offset_durations * T
    std::optional<double> t_off;   // explicit override
    double min_decay_times{5.0};   // required trajectory length past t_off, in 1/linewidth
    double max_envelope{0.011109}; // pulse envelope allowed at the window start, just above e^{-4.5}
};

double fid_start(const SystemConfig& cfg, const FidPolicy& policy = {});

struct FidWindow {
    double t_off{0.0};   // time of the first sample
    double dt{0.0};
    std::vector<cplx> samples; // lab frame
    SignalSource source{SignalSource::Cavity};
    double omega_ref{0.0};  // read-off frequency (first dipole)
    double linewidth{0.0};  // reference Purcell linewidth
};

// series is the lab-frame signal sampled at t_start + k dt.
FidWindow fid_window(std::span<const cplx> series, double t_start, double dt, const SystemConfig& cfg,
                     SignalSource source, const FidPolicy& policy = {});
FidWindow fid_window(const MeanFieldTrajectory& traj, SignalSource source, const FidPolicy& policy = {});
FidWindow fid_window(const LindbladSeries& series, SignalSource source, const FidPolicy& policy = {});

struct SpectralOptions {
    double band_linewidths{10.0};     // half-width of the evaluated band
    double resolution_linewidths{0.02}; // grid spacing, gamma_tilde / 50
};

struct Spectrum {
    std::vector<double> omega;
    std::vector<cplx> values;
    SignalSource source{SignalSource::Cavity};
    double omega_ref{0.0};
};

// Throws ValidationError when the sampling cannot resolve the band (aliasing).
Spectrum fourier(const FidWindow& w, const SpectralOptions& options = {});

struct PhaseSpectrum {
    std::vector<double> omega;
    std::vector<double> magnitude;
    std::vector<double> raw_phase;
    std::vector<double> phase; // unwrapped; NaN where masked
    std::vector<bool> valid;
    SignalSource source{SignalSource::Cavity};
    double omega_ref{0.0};
};

// Four-quadrant phase, unwrapped across valid bins. Bins below noise_floor * peak are masked.
PhaseSpectrum phase_spectrum(const Spectrum& s, double noise_floor = 1e-12);

// Linear interpolation of the unwrapped phase; throws ValidationError next to masked bins.
double phase_at(const PhaseSpectrum& p, double omega);

struct RelativePhase {
    std::vector<double> omega;
    std::vector<double> delta; // NaN where either input is masked
    double at_reference{0.0};
};

// Throws ValidationError when the grids differ.
RelativePhase relative_phase(const PhaseSpectrum& run, const PhaseSpectrum& baseline);

// Window, transform and difference in one go.
double nonlinear_phase(const FidWindow& run, const FidWindow& baseline, const SpectralOptions& options = {});

enum class BaselineMode { Harmonic, WeakDrive };
std::string baseline_name(BaselineMode m);
BaselineMode parse_baseline(std::string_view name);

// Harmonic: every U set to zero at the same drive. WeakDrive: F0 = 0.01 kappa.
SystemConfig baseline_config(const SystemConfig& cfg, BaselineMode mode);

struct PhaseEquivalence {
    double cavity{0.0};        // nonlinear phase of <a>
    double dipole{0.0};        // nonlinear phase of <B0>
    double difference{0.0};    // cavity - dipole
    double filter_phase{0.0};  // Phi_cavity(omega_ref) - Phi_dipole(omega_ref) of the run itself
};

PhaseEquivalence dipole_phase_equivalence(const FidWindow& run_cavity, const FidWindow& run_dipole,
                                          const FidWindow& base_cavity, const FidWindow& base_dipole,
                                          const SpectralOptions& options = {});

struct FitOptions {
    double x_min{0.0};
    double x_max{1e300};
    std::size_t min_points{5};
    double residual_threshold{0.05}; // relative RMS residual flagging regime breakdown
};

struct NonlinearPhaseResult {
    std::vector<std::pair<double, double>> points; // (F0/kappa, delta phi)
    double x_min{0.0};
    double x_max{0.0};
    std::size_t used{0};
    double coefficient{0.0};   // C in delta phi = C x^2
    double alpha{0.0};
    double exponent{0.0};      // free power-law exponent
    double prefactor{0.0};     // free power-law prefactor
    double relative_residual{0.0};
    bool regime_breakdown{false};
    std::vector<double> residuals;
};

// alpha = C N gamma_tilde / (2 U) with U and gamma from cfg.
NonlinearPhaseResult fit_alpha(const std::vector<std::pair<double, double>>& points, const SystemConfig& cfg,
                               const FitOptions& options = {});

struct Extrema {
    std::vector<double> times;
    std::vector<int> kind; // +1 maximum, -1 minimum
    std::vector<double> values;
};

// Extrema of Re[R(t) e^{-i omega_d t}] for a rotating-frame series R, located by
// root-finding on a cubic interpolant of R.
Extrema carrier_extrema(std::span<const cplx> rotating, double t_start, double dt, double omega_d);

struct DelaySeries {
    std::vector<double> times;  // weak-trace extremum times
    std::vector<double> delays; // t_strong - t_weak
    std::vector<int> kind;
};

DelaySeries time_delay(std::span<const cplx> strong_rotating, std::span<const cplx> weak_rotating, double t_start,
                       double dt, double omega_d);
DelaySeries time_delay(const MeanFieldTrajectory& strong, const MeanFieldTrajectory& weak);

} // namespace kerrcav
