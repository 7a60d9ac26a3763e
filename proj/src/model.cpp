#include "kerrcav/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "kerrcav/errors.hpp"

namespace kerrcav {

bool SystemConfig::homogeneous() const noexcept {
    for (const auto& d : dipoles) {
        if (!(d == dipoles.front())) return false;
    }
    return true;
}

double SystemConfig::collective_coupling() const noexcept {
    double s = 0.0;
    for (const auto& d : dipoles) s += d.coupling * d.coupling;
    return std::sqrt(s);
}

void validate(const SystemConfig& cfg) {
    auto fail = [](const std::string& what) { throw ConfigError(what); };
    if (cfg.dipoles.empty()) fail("at least one dipole is required");
    if (!(cfg.cavity.kappa > 0.0)) fail("cavity.kappa must be > 0");
    if (!std::isfinite(cfg.cavity.omega_c)) fail("cavity.omega_c must be finite");
    for (std::size_t n = 0; n < cfg.dipoles.size(); ++n) {
        const auto& d = cfg.dipoles[n];
        const std::string key = "dipoles[" + std::to_string(n) + "]";
        if (!(d.omega > 0.0)) fail(key + ".omega must be > 0");
        if (!(d.anharmonicity >= 0.0)) fail(key + ".U must be >= 0");
        if (!(d.gamma > 0.0)) fail(key + ".gamma must be > 0");
        if (!(d.coupling >= 0.0)) fail(key + ".g must be >= 0");
    }
    if (!(cfg.pulse.duration > 0.0)) fail("pulse.T must be > 0");
    if (!(cfg.pulse.amplitude >= 0.0)) fail("pulse.F0 must be >= 0");
    if (!std::isfinite(cfg.pulse.center) || !std::isfinite(cfg.pulse.carrier))
        fail("pulse.t0 and pulse.omega_d must be finite");
}

double eigenenergy(int nu, const DipoleParams& d) {
    const double v = nu;
    return d.omega * v - d.anharmonicity * (v * v - v);
}

double level_spacing(int nu, const DipoleParams& d) {
    return d.omega - 2.0 * d.anharmonicity * nu;
}

double purcell_rate(const SystemConfig& cfg) {
    const auto& d0 = cfg.dipoles.front();
    for (const auto& d : cfg.dipoles) {
        if (d.gamma != d0.gamma || d.coupling != d0.coupling)
            throw ConfigError("purcell_rate requires identical dipole rates and couplings; "
                              "use the two-well model for inhomogeneous sets");
    }
    const double n = static_cast<double>(cfg.size());
    return d0.gamma * (1.0 + 4.0 * n * d0.coupling * d0.coupling / (cfg.cavity.kappa * d0.gamma));
}

double reference_linewidth(const SystemConfig& cfg) {
    double gbar = 0.0;
    for (const auto& d : cfg.dipoles) gbar += d.gamma;
    gbar /= static_cast<double>(cfg.size());
    const double g2 = cfg.collective_coupling();
    return gbar + 4.0 * g2 * g2 / cfg.cavity.kappa;
}

double envelope(double t, const PulseParams& p) {
    const double x = (t - p.center) / p.duration;
    return std::exp(-0.5 * x * x);
}

cplx drive_amplitude(double t, const PulseParams& p, Frame frame) {
    const double a = p.amplitude * envelope(t, p);
    if (frame == Frame::RotatingAtDrive) return {a, 0.0};
    return std::polar(a, -p.carrier * t);
}

CollectiveCoefficients::CollectiveCoefficients(std::size_t n) : n_(n), table_(n * n) {
    if (n == 0) throw ConfigError("collective transform needs N >= 1");
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t alpha = 0; alpha < n; ++alpha)
        for (std::size_t well = 0; well < n; ++well)
            table_[alpha * n + well] = scale * coefficient(alpha, well + 1);
}

cplx CollectiveCoefficients::coefficient(std::size_t alpha, std::size_t n) const {
    // Reduce the phase index mod N first so large products stay exact.
    const std::size_t k = (alpha * n) % n_;
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_);
    if (k == 0) return {1.0, 0.0};
    if (2 * k == n_) return {-1.0, 0.0};
    return std::polar(1.0, phase);
}

std::vector<cplx> CollectiveCoefficients::to_collective(std::span<const cplx> local) const {
    if (local.size() != n_) throw ConfigError("to_collective: length mismatch");
    std::vector<cplx> out(n_);
    for (std::size_t alpha = 0; alpha < n_; ++alpha) {
        cplx s{};
        for (std::size_t w = 0; w < n_; ++w) s += table_[alpha * n_ + w] * local[w];
        out[alpha] = s;
    }
    return out;
}

std::vector<cplx> CollectiveCoefficients::to_local(std::span<const cplx> collective) const {
    if (collective.size() != n_) throw ConfigError("to_local: length mismatch");
    std::vector<cplx> out(n_);
    for (std::size_t w = 0; w < n_; ++w) {
        cplx s{};
        for (std::size_t alpha = 0; alpha < n_; ++alpha)
            s += std::conj(table_[alpha * n_ + w]) * collective[alpha];
        out[w] = s;
    }
    return out;
}

std::vector<cplx> to_collective(std::span<const cplx> local) {
    return CollectiveCoefficients(local.size()).to_collective(local);
}

std::vector<cplx> to_local(std::span<const cplx> collective) {
    return CollectiveCoefficients(collective.size()).to_local(collective);
}

} // namespace kerrcav
