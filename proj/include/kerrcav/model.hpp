// model.hpp: physical parameters, Kerr ladder, pulse envelope and collective modes
//
// Units: angular frequencies and rates in rad/ps, times in ps.

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace kerrcav {

using cplx = std::complex<double>;

struct DipoleParams {
    double omega{40.0};        // fundamental transition frequency
    double anharmonicity{0.0}; // Kerr parameter U >= 0
    double gamma{0.6};         // relaxation rate > 0
    double coupling{0.0};      // light-matter coupling g >= 0

    bool operator==(const DipoleParams&) const = default;
};

struct CavityParams {
    double omega_c{40.0};
    double kappa{12.0};

    bool operator==(const CavityParams&) const = default;
};

struct PulseParams {
    double amplitude{0.0}; // F0
    double carrier{40.0};  // omega_d
    double center{0.6};    // t0
    double duration{0.155}; // T

    bool operator==(const PulseParams&) const = default;
};

enum class Frame { Lab, RotatingAtDrive };

struct SystemConfig {
    CavityParams cavity;
    std::vector<DipoleParams> dipoles{DipoleParams{}};
    PulseParams pulse;
    Frame frame{Frame::RotatingAtDrive};

    std::size_t size() const noexcept { return dipoles.size(); }
    // True when every dipole shares omega, U, gamma and g.
    bool homogeneous() const noexcept;
    // sqrt(sum_n g_n^2): the bright-mode coupling, sqrt(N) g when homogeneous.
    double collective_coupling() const noexcept;

    bool operator==(const SystemConfig&) const = default;
};

// Throws ConfigError when any parameter invariant is violated.
void validate(const SystemConfig& cfg);

double eigenenergy(int nu, const DipoleParams& d);
double level_spacing(int nu, const DipoleParams& d);

// gamma (1 + 4 N g^2 / (kappa gamma)); throws ConfigError for inhomogeneous sets.
double purcell_rate(const SystemConfig& cfg);

// Purcell-type linewidth built from the mean dipole rate; accepts any dipole set.
double reference_linewidth(const SystemConfig& cfg);

double envelope(double t, const PulseParams& p);
cplx drive_amplitude(double t, const PulseParams& p, Frame frame);

// Discrete Fourier map between local wells and collective modes, with
// c_{alpha,n} = exp(i 2 pi alpha n / N) for wells n = 1..N.
class CollectiveCoefficients {
public:
    explicit CollectiveCoefficients(std::size_t n);

    std::size_t size() const noexcept { return n_; }
    // Unnormalized coefficient c_{alpha,n}, n counted from 1.
    cplx coefficient(std::size_t alpha, std::size_t n) const;

    std::vector<cplx> to_collective(std::span<const cplx> local) const;
    std::vector<cplx> to_local(std::span<const cplx> collective) const;

private:
    std::size_t n_;
    std::vector<cplx> table_; // row alpha, column well, already scaled by 1/sqrt(N)
};

std::vector<cplx> to_collective(std::span<const cplx> local);
std::vector<cplx> to_local(std::span<const cplx> collective);

} // namespace kerrcav
