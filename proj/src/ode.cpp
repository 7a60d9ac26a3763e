#include "kerrcav/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "kerrcav/errors.hpp"
#include "kerrcav/kernels.hpp"

namespace kerrcav {
namespace {

constexpr int kStages = 7;
constexpr std::array<double, kStages> kC{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[kStages][kStages - 1] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// 5th-order weights minus embedded 4th-order weights.
constexpr std::array<double, kStages> kE{-71.0 / 57600,  0.0, 71.0 / 16695, -71.0 / 1920,
                                         17253.0 / 339200, -22.0 / 525, 1.0 / 40};
// Shampine's continuous extension: b_i(theta) = sum_p kP[i][p] theta^(p+1).
constexpr double kP[kStages][4] = {
    {1.0, -8048581381.0 / 2820520608, 8663915743.0 / 2820520608, -12715105075.0 / 11282082432},
    {0.0, 0.0, 0.0, 0.0},
    {0.0, 131558114200.0 / 32700410799, -68118460800.0 / 10900136933, 87487479700.0 / 32700410799},
    {0.0, -1754552775.0 / 470086768, 14199869525.0 / 1410260304, -10690763975.0 / 1880347072},
    {0.0, 127303824393.0 / 49829197408, -318862633887.0 / 49829197408, 701980252875.0 / 199316789632},
    {0.0, -282668133.0 / 205662961, 2019193451.0 / 616988883, -1453857185.0 / 822651844},
    {0.0, 40617522.0 / 29380423, -110615467.0 / 29380423, 69997945.0 / 29380423},
};

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;

bool all_finite(std::span<const cplx> v) {
    return std::all_of(v.begin(), v.end(), [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

double rms(std::span<const cplx> e, std::span<const cplx> y0, std::span<const cplx> y1, const OdeOptions& o) {
    if (e.empty()) return 0.0;
    return std::sqrt(kernels::scaled_sq_norm(e, y0, y1, o.atol, o.rtol) / static_cast<double>(e.size()));
}

[[noreturn]] void fail(const std::string& what, double t) {
    std::ostringstream os;
    os << what << " at t = " << t;
    throw SolverError(os.str());
}

} // namespace

OdeStats integrate_uniform(const OdeRhs& rhs, std::vector<cplx> y, double t_start, double dt, std::size_t samples,
                           const OdeOptions& options, const OdeObserver& observer) {
    OdeStats stats;
    if (samples == 0) return stats;
    if (!(dt > 0.0)) throw SolverError("output spacing must be positive");
    const std::size_t n = y.size();
    const double t_final = t_start + static_cast<double>(samples - 1) * dt;

    std::array<std::vector<cplx>, kStages> k;
    for (auto& v : k) v.assign(n, cplx{});
    std::vector<cplx> stage(n), y_new(n), err(n), dense(n);

    auto eval = [&](double t, std::span<const cplx> state, std::vector<cplx>& out) {
        rhs(t, state, out);
        ++stats.rhs_evals;
    };

    eval(t_start, y, k[0]);
    observer(0, t_start, y);
    std::size_t next_out = 1;
    if (next_out >= samples) return stats;

    double h = options.h_initial;
    if (!(h > 0.0)) {
        // Hairer-Wanner starting step heuristic.
        std::vector<cplx> zero(n);
        const double d0 = rms(y, zero, zero, options);
        const double d1 = rms(k[0], zero, zero, options);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, t_final - t_start);
        stage = y;
        kernels::axpy(h0, k[0], stage);
        eval(t_start + h0, stage, k[1]);
        for (std::size_t i = 0; i < n; ++i) err[i] = k[1][i] - k[0][i];
        const double d2 = rms(err, zero, zero, options) / h0;
        const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                    : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
        h = std::min(100.0 * h0, h1);
    }
    h = std::min(h, options.h_max);

    double t = t_start;
    while (next_out < samples) {
        if (stats.accepted + stats.rejected >= options.max_steps) fail("step budget exhausted", t);
        const double remaining = t_final - t;
        bool last = false;
        if (h >= remaining) {
            h = remaining;
            last = true;
        }
        if (h <= 1e-13 * std::max(1.0, std::abs(t))) fail("step size underflow (stiff or singular system)", t);

        for (int s = 1; s < kStages; ++s) {
            stage = y;
            for (int j = 0; j < s; ++j)
                if (kA[s][j] != 0.0) kernels::axpy(h * kA[s][j], k[j], stage);
            if (s == kStages - 1) y_new = stage;
            eval(t + kC[s] * h, stage, k[s]);
        }
        std::fill(err.begin(), err.end(), cplx{});
        for (int s = 0; s < kStages; ++s)
            if (kE[s] != 0.0) kernels::axpy(h * kE[s], k[s], err);
        const double e = rms(err, y, y_new, options);
        if (!std::isfinite(e)) fail("non-finite error estimate", t);

        if (e <= 1.0) {
            const double t_new = last ? t_final : t + h;
            while (next_out < samples) {
                const double t_out = next_out + 1 == samples ? t_final : t_start + static_cast<double>(next_out) * dt;
                if (t_out > t_new) break;
                const double theta = (t_out - t) / h;
                dense = y;
                for (int s = 0; s < kStages; ++s) {
                    const double* p = kP[s];
                    const double b = theta * (p[0] + theta * (p[1] + theta * (p[2] + theta * p[3])));
                    if (b != 0.0) kernels::axpy(h * b, k[s], dense);
                }
                observer(next_out, t_out, dense);
                ++next_out;
            }
            if (!all_finite(y_new)) fail("non-finite state", t);
            std::swap(y, y_new);
            std::swap(k[0], k[kStages - 1]);
            t = t_new;
            ++stats.accepted;
            const double factor = e == 0.0 ? kMaxFactor : std::clamp(kSafety * std::pow(e, -0.2), kMinFactor, kMaxFactor);
            if (!last) h = std::min(h * factor, options.h_max);
        } else {
            ++stats.rejected;
            h *= std::max(kMinFactor, kSafety * std::pow(e, -0.2));
        }
    }
    return stats;
}

} // namespace kerrcav
