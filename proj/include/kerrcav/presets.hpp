// presets.hpp: frozen experiment definitions for the reference figure sets
//
// Shared parameters: omega_0 = omega_c = omega_d = 40, kappa = 12, gamma = 0.6,
// sqrt(N) g = 1 with N = 2, T = 0.155 ps, t0 = 0.6 ps.

#pragma once

#include <string>
#include <vector>

#include "kerrcav/experiment.hpp"

namespace kerrcav {

std::vector<std::string> preset_ids();
bool is_preset(const std::string& id);

// Two identical wells with U = u_over_gamma * gamma and no drive.
SystemConfig reference_config(double u_over_gamma);

// Throws ConfigError for an unknown id.
ExperimentSpec preset(const std::string& id);

} // namespace kerrcav
