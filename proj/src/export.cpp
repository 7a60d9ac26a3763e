#include "kerrcav/export.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "kerrcav/config_io.hpp"
#include "kerrcav/errors.hpp"

namespace kerrcav {
namespace {

std::string num(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

void append_complex(std::string& line, cplx z) {
    line += ',';
    line += num(z.real());
    line += ',';
    line += num(z.imag());
}

std::string header_comment(const SystemConfig& cfg, std::string_view kind) {
    std::string h = "# kerrcav ";
    h += kind;
    h += "\n# frame: " + frame_name(cfg.frame) + "\n# config_hash: " + config_hash(cfg) + "\n";
    return h;
}

} // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string config_hash(const SystemConfig& cfg) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(serialize(cfg));
    return os.str();
}

nlohmann::json config_json(const SystemConfig& cfg) {
    nlohmann::json j;
    j["cavity"] = {{"omega_c", cfg.cavity.omega_c}, {"kappa", cfg.cavity.kappa}};
    j["pulse"] = {{"F0", cfg.pulse.amplitude},
                  {"omega_d", cfg.pulse.carrier},
                  {"t0", cfg.pulse.center},
                  {"T", cfg.pulse.duration}};
    j["frame"] = frame_name(cfg.frame);
    j["dipoles"] = nlohmann::json::array();
    for (const auto& d : cfg.dipoles)
        j["dipoles"].push_back({{"omega", d.omega}, {"U", d.anharmonicity}, {"gamma", d.gamma}, {"g", d.coupling}});
    j["units"] = "rad/ps, ps";
    j["config_hash"] = config_hash(cfg);
    return j;
}

std::string trajectory_csv(const MeanFieldTrajectory& traj) {
    std::string out = header_comment(traj.config(), "mean-field trajectory");
    out += "# model: " + model_name(traj.model()) + "\n";
    out += "t,re_a,im_a";
    if (traj.model() == MeanFieldModel::TwoWellLocal)
        out += ",re_b1,im_b1,re_b2,im_b2";
    else if (traj.model() == MeanFieldModel::TwoWellCollective)
        out += ",re_B0,im_B0,re_B1,im_B1";
    else
        out += ",re_B0,im_B0";
    out += '\n';
    for (std::size_t k = 0; k < traj.samples(); ++k) {
        std::string line = num(traj.time(k));
        append_complex(line, traj.field(k));
        for (std::size_t m = 0; m < traj.mode_count(); ++m) append_complex(line, traj.mode(k, m));
        out += line;
        out += '\n';
    }
    return out;
}

std::string lindblad_csv(const LindbladSeries& s) {
    std::string out = header_comment(s.config, "lindblad series");
    out += "# truncation: n_photon_max=" + std::to_string(s.hilbert.n_photon_max) +
           " nu_max=" + std::to_string(s.hilbert.nu_max) + "\n";
    out += "t,re_a,im_a,re_B0,im_B0";
    if (!s.dark.empty()) out += ",re_B1,im_B1";
    out += ",n_photon";
    for (std::size_t w = 0; w < s.populations.size(); ++w)
        for (std::size_t nu = 0; nu < s.populations[w].size(); ++nu)
            out += ",P" + std::to_string(nu) + "_w" + std::to_string(w + 1);
    out += '\n';
    for (std::size_t k = 0; k < s.samples; ++k) {
        std::string line = num(s.time(k));
        append_complex(line, s.field[k]);
        append_complex(line, s.bright[k]);
        if (!s.dark.empty()) append_complex(line, s.dark[k]);
        line += ',' + num(s.photon_number[k]);
        for (const auto& well : s.populations)
            for (const auto& p : well) line += ',' + num(p[k]);
        out += line;
        out += '\n';
    }
    return out;
}

std::string spectrum_csv(const Spectrum& spectrum, const PhaseSpectrum& phase) {
    std::string out = "# kerrcav spectrum\n# source: " + source_name(spectrum.source) +
                      "\n# convention: (1/sqrt(2 pi)) int dt x(t) exp(+i omega t), lab frame\n";
    out += "omega,re,im,abs,phase\n";
    for (std::size_t j = 0; j < spectrum.omega.size(); ++j) {
        std::string line = num(spectrum.omega[j]);
        append_complex(line, spectrum.values[j]);
        line += ',' + num(phase.magnitude[j]);
        line += ',' + (phase.valid[j] ? num(phase.phase[j]) : std::string());
        out += line;
        out += '\n';
    }
    return out;
}

std::string delay_csv(const DelaySeries& d) {
    std::string out = "# kerrcav time delay (strong minus weak extremum time)\nt,delay,kind\n";
    for (std::size_t i = 0; i < d.times.size(); ++i)
        out += num(d.times[i]) + ',' + num(d.delays[i]) + ',' + (d.kind[i] > 0 ? "max" : "min") + '\n';
    return out;
}

nlohmann::json fit_json(const NonlinearPhaseResult& fit) {
    nlohmann::json j;
    j["points"] = nlohmann::json::array();
    for (const auto& [x, y] : fit.points) j["points"].push_back({x, y});
    auto finite = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    j["fit_range"] = {fit.x_min, std::isfinite(fit.x_max) && fit.x_max < 1e300 ? nlohmann::json(fit.x_max) : nlohmann::json(nullptr)};
    j["points_used"] = fit.used;
    j["coefficient"] = finite(fit.coefficient);
    j["alpha"] = finite(fit.alpha);
    j["exponent"] = finite(fit.exponent);
    j["prefactor"] = finite(fit.prefactor);
    j["relative_residual"] = finite(fit.relative_residual);
    j["regime_breakdown"] = fit.regime_breakdown;
    j["residuals"] = fit.residuals;
    return j;
}

void write_text_file(const std::string& path, std::string_view content) {
    const std::filesystem::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

void Manifest::add(const std::string& relative_path, const std::string& kind) { files_.emplace_back(relative_path, kind); }

void Manifest::write(const std::string& dir, const std::string& hash, const nlohmann::json& extra) const {
    nlohmann::json j = extra;
    j["config_hash"] = hash;
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::ostringstream ts;
    ts << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
    j["created"] = ts.str();
    j["files"] = nlohmann::json::array();
    for (const auto& [path, kind] : files_) j["files"].push_back({{"path", path}, {"kind", kind}});
    write_text_file((std::filesystem::path(dir) / "manifest.json").string(), j.dump(2) + "\n");
}

} // namespace kerrcav
