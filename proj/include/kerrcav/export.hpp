// export.hpp: CSV/JSON serialization of trajectories, spectra and fits
//
// Data files carry no timestamps so identical inputs give identical bytes;
// the run manifest is the only place a wall-clock time appears.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kerrcav/lindblad.hpp"
#include "kerrcav/meanfield.hpp"
#include "kerrcav/spectral.hpp"

namespace kerrcav {

std::uint64_t fnv1a64(std::string_view bytes);
// 16 hex digits of the FNV-1a hash of the serialized configuration.
std::string config_hash(const SystemConfig& cfg);

nlohmann::json config_json(const SystemConfig& cfg);

// Columns t, re/im of the field and every stored mode; frame in a header comment.
std::string trajectory_csv(const MeanFieldTrajectory& traj);
// Same layout as the mean-field CSV, plus photon number and P_nu per well.
std::string lindblad_csv(const LindbladSeries& series);
// omega, re, im, abs, phase (unwrapped, empty where masked).
std::string spectrum_csv(const Spectrum& spectrum, const PhaseSpectrum& phase);
std::string delay_csv(const DelaySeries& delay);

nlohmann::json fit_json(const NonlinearPhaseResult& fit);

// Writes the file, creating parent directories; throws ConfigError on failure.
void write_text_file(const std::string& path, std::string_view content);

class Manifest {
public:
    void add(const std::string& relative_path, const std::string& kind);
    const std::vector<std::pair<std::string, std::string>>& files() const noexcept { return files_; }
    // Writes manifest.json into dir with the hash, the extra fields and a UTC timestamp.
    void write(const std::string& dir, const std::string& hash, const nlohmann::json& extra) const;

private:
    std::vector<std::pair<std::string, std::string>> files_;
};

} // namespace kerrcav
