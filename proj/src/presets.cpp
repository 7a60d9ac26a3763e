#include "kerrcav/presets.hpp"

#include <algorithm>
#include <cmath>

#include "kerrcav/errors.hpp"

namespace kerrcav {
namespace {

std::vector<double> drive_grid(double start, double stop, double step) {
    std::vector<double> v;
    const auto n = static_cast<int>(std::llround((stop - start) / step));
    for (int i = 0; i <= n; ++i) v.push_back(std::round((start + step * i) * 1e9) / 1e9);
    return v;
}

} // namespace

std::vector<std::string> preset_ids() { return {"fig2", "fig3", "fig4a", "fig4b", "fig5a", "fig5b", "fig5c"}; }

bool is_preset(const std::string& id) {
    const auto ids = preset_ids();
    return std::find(ids.begin(), ids.end(), id) != ids.end();
}

SystemConfig reference_config(double u_over_gamma) {
    SystemConfig cfg;
    cfg.cavity = {40.0, 12.0};
    DipoleParams d;
    d.omega = 40.0;
    d.gamma = 0.6;
    d.anharmonicity = u_over_gamma * d.gamma;
    d.coupling = 1.0 / std::sqrt(2.0);
    cfg.dipoles = {d, d};
    cfg.pulse = {0.0, 40.0, 0.6, 0.155};
    cfg.frame = Frame::RotatingAtDrive;
    return cfg;
}

ExperimentSpec preset(const std::string& id) {
    ExperimentSpec s;
    s.name = id;
    if (id == "fig2") {
        // Bright-mode traces and peak delays for slow and fast dipole decay.
        s.base = reference_config(1.0);
        s.axes = {{"dipoles[*].gamma", {0.6, 10.0}}, {"pulse.F0_over_kappa", {0.01, 0.2}}};
        s.delay_reference = 0.01;
    } else if (id == "fig3") {
        s.base = reference_config(0.5);
        s.axes = {{"dipoles[*].U_over_gamma", {0.0, 0.1, 0.5, 1.0}}, {"pulse.F0_over_kappa", drive_grid(0.02, 0.2, 0.02)}};
        s.fit_axis = "pulse.F0_over_kappa";
        s.write_spectra = true;
    } else if (id == "fig4a") {
        s.base = reference_config(0.5);
        s.axes = {{"dipoles[1].gamma", {0.3, 0.6, 0.9}}, {"pulse.F0_over_kappa", drive_grid(0.05, 0.5, 0.05)}};
    } else if (id == "fig4b") {
        s.base = reference_config(0.5);
        s.axes = {{"dipoles[1].omega", {31.2, 38.4, 40.0, 41.6, 48.8}},
                  {"pulse.F0_over_kappa", drive_grid(0.05, 0.5, 0.05)}};
    } else if (id == "fig5a" || id == "fig5b") {
        s.base = reference_config(id == "fig5a" ? 0.5 : 2.0);
        s.solver = SolverChoice::Both;
        s.axes = {{"pulse.F0_over_kappa", drive_grid(0.05, 0.5, 0.05)}};
    } else if (id == "fig5c") {
        s.base = reference_config(0.5);
        s.base.pulse.amplitude = 0.3 * s.base.cavity.kappa;
        s.solver = SolverChoice::Lindblad;
        s.axes = {{"dipoles[*].U_over_gamma", {0.0, 0.5, 1.0, 2.0}}};
    } else {
        throw ConfigError("unknown preset '" + id + "'");
    }
    s.validate();
    return s;
}

} // namespace kerrcav
