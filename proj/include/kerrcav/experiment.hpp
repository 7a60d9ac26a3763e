// experiment.hpp: parameter sweeps, nonlinear-phase extraction and result bundles

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kerrcav/config_io.hpp"
#include "kerrcav/hilbert.hpp"
#include "kerrcav/meanfield.hpp"
#include "kerrcav/model.hpp"
#include "kerrcav/spectral.hpp"

namespace kerrcav {

enum class SolverChoice { MeanField, Lindblad, Both };
std::string solver_name(SolverChoice s);
SolverChoice parse_solver(std::string_view name);

struct SweepAxis {
    std::string path;
    std::vector<double> values;
};

struct ExperimentSpec {
    std::string name{"experiment"};
    SystemConfig base;
    SolverChoice solver{SolverChoice::MeanField};
    std::vector<SweepAxis> axes; // first axis varies slowest

    FidPolicy fid;
    BaselineMode baseline{BaselineMode::Harmonic};
    SpectralOptions spectral;
    SignalSource source{SignalSource::Cavity};
    std::string fit_axis; // fit delta phi = C x^2 along this axis when set
    FitOptions fit;

    HilbertConfig hilbert;
    bool auto_truncation{false};
    double t_end{0.0}; // 0 selects the solver default
    std::optional<double> delay_reference; // F0/kappa of the weak trace for time-delay tables

    bool write_series{true};
    bool write_spectra{false};
    std::string output_dir; // nothing is written when empty
    unsigned jobs{0};       // 0 selects the hardware concurrency

    // Throws ConfigError when a path does not resolve or the Hilbert space is too large.
    void validate() const;
    std::size_t point_count() const;
};

// Reads system keys plus: solver, sweep.<path> (comma list or start:stop:count),
// baseline, source, fid.offset_T, fid.t_off, fit.axis, fit.x_min, fit.x_max,
// hilbert.n_photon_max, hilbert.nu_max, hilbert.auto, t_end, delay.reference, name.
ExperimentSpec parse_experiment(const KeyValueDoc& doc);
std::vector<double> parse_value_list(std::string_view text, const std::string& key);

struct PointResult {
    std::size_t index{0};
    std::vector<double> coords;
    SystemConfig config;
    std::optional<double> phase_meanfield;
    std::optional<double> phase_dipole_meanfield;
    std::optional<double> phase_lindblad;
    std::optional<double> max_p2;
    int n_photon_max{0};
    std::shared_ptr<const MeanFieldTrajectory> trajectory;
};

struct FitGroup {
    std::vector<double> coords; // values of the non-fit axes
    std::string solver;
    NonlinearPhaseResult fit;
};

struct ExperimentResult {
    std::vector<std::string> axis_paths;
    std::vector<PointResult> points;
    std::vector<FitGroup> fits;
};

// Runs every sweep point on a worker pool. Failures are rethrown with the point identified.
ExperimentResult run(const ExperimentSpec& spec);

std::string points_csv(const ExperimentResult& result);

struct PhaseTable {
    std::vector<std::string> axes;
    std::vector<std::vector<double>> coords;
    std::vector<double> values; // NaN where absent
};

// column: phase_meanfield | phase_lindblad | phase_dipole_meanfield | max_p2
PhaseTable load_phase_table(const std::string& dir, const std::string& column);
PhaseTable phase_table(const ExperimentResult& result, SolverChoice which);

struct CompareRow {
    std::vector<double> coords;
    double meanfield{0.0};
    double lindblad{0.0};
    double ratio{0.0}; // lindblad / meanfield
    bool agree{false}; // ratio within [1/2, 2]
};

struct CompareReport {
    std::vector<std::string> axes;
    std::vector<CompareRow> rows;
    bool all_agree{true};
    double max_ratio{0.0};
    double min_ratio{0.0};
};

// Throws ValidationError when the two tables do not share axes and points.
CompareReport compare(const PhaseTable& meanfield, const PhaseTable& lindblad);
std::string compare_csv(const CompareReport& report);

} // namespace kerrcav
