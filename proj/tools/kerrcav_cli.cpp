// kerrcav: command-line runner for cavity/Kerr-dipole simulations and sweeps

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "kerrcav/config_io.hpp"
#include "kerrcav/errors.hpp"
#include "kerrcav/experiment.hpp"
#include "kerrcav/export.hpp"
#include "kerrcav/presets.hpp"

namespace {

using namespace kerrcav;

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitValidation = 4;

struct Options {
    std::string config;
    std::string solver;
    unsigned jobs{0};
    std::string out;
    std::string baseline;
    std::vector<std::string> overrides;
    bool allow_preset_override{false};
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

ExperimentSpec load_spec(const Options& o) {
    if (o.config.empty()) throw ConfigError("--config is required");
    return parse_experiment(KeyValueDoc::load(o.config));
}

void apply_common(ExperimentSpec& spec, const Options& o, bool frozen) {
    if (frozen && !o.overrides.empty() && !o.allow_preset_override)
        throw ConfigError("presets are frozen; pass --allow-preset-override to change parameters");
    for (const auto& ov : o.overrides) apply_override(spec.base, ov);
    if (!o.solver.empty()) spec.solver = parse_solver(o.solver);
    if (!o.baseline.empty()) spec.baseline = parse_baseline(o.baseline);
    if (o.jobs != 0) spec.jobs = o.jobs;
    if (!o.out.empty()) spec.output_dir = o.out;
    spec.validate();
}

void print_points(const ExperimentResult& r) {
    std::cout << "index";
    for (const auto& a : r.axis_paths) std::cout << '\t' << a;
    std::cout << "\tphase_meanfield\tphase_lindblad\tmax_p2\n";
    for (const auto& p : r.points) {
        std::cout << p.index;
        for (double c : p.coords) std::cout << '\t' << fmt(c);
        std::cout << '\t' << (p.phase_meanfield ? fmt(*p.phase_meanfield) : "-") << '\t'
                  << (p.phase_lindblad ? fmt(*p.phase_lindblad) : "-") << '\t' << (p.max_p2 ? fmt(*p.max_p2) : "-")
                  << '\n';
    }
    for (const auto& f : r.fits) {
        std::cout << "fit[" << f.solver;
        for (double c : f.coords) std::cout << ' ' << fmt(c);
        std::cout << "]: alpha=" << fmt(f.fit.alpha) << " exponent=" << fmt(f.fit.exponent)
                  << " residual=" << fmt(f.fit.relative_residual)
                  << (f.fit.regime_breakdown ? " (beyond quadratic regime)" : "") << '\n';
    }
}

int run_spec(ExperimentSpec spec) {
    const auto result = run(spec);
    print_points(result);
    if (!spec.output_dir.empty()) std::cout << "wrote " << spec.output_dir << "/manifest.json\n";
    return 0;
}

int cmd_compare(const std::vector<std::string>& dirs, const Options& o) {
    PhaseTable mf, lb;
    if (dirs.size() == 1) {
        mf = load_phase_table(dirs[0], "phase_meanfield");
        lb = load_phase_table(dirs[0], "phase_lindblad");
    } else {
        mf = load_phase_table(dirs[0], "phase_meanfield");
        lb = load_phase_table(dirs[1], "phase_lindblad");
    }
    const auto report = compare(mf, lb);
    const std::string csv = compare_csv(report);
    std::cout << csv;
    std::cout << "ratio range [" << fmt(report.min_ratio) << ", " << fmt(report.max_ratio) << "]: "
              << (report.all_agree ? "agreement within a factor of 2" : "mean-field breakdown") << '\n';
    if (!o.out.empty()) write_text_file((std::filesystem::path(o.out) / "compare.csv").string(), csv);
    return 0;
}

int cmd_plot_data(const std::string& dir, const Options& o) {
    const std::vector<std::string> columns{"phase_meanfield", "phase_dipole_meanfield", "phase_lindblad", "max_p2"};
    std::string out = "point,axis_values,variable,value\n";
    for (const auto& col : columns) {
        const auto t = load_phase_table(dir, col);
        for (std::size_t i = 0; i < t.values.size(); ++i) {
            if (std::isnan(t.values[i])) continue;
            std::string coords;
            for (std::size_t a = 0; a < t.axes.size(); ++a)
                coords += (a ? ";" : "") + t.axes[a] + "=" + format_double(t.coords[i][a]);
            out += std::to_string(i) + "," + coords + "," + col + "," + format_double(t.values[i]) + "\n";
        }
    }
    if (o.out.empty()) std::cout << out;
    else write_text_file((std::filesystem::path(o.out) / "plot_long.csv").string(), out);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"kerrcav: Kerr quantum-well dipoles in a lossy THz cavity"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--config", o.config, "configuration file (key = value)");
    app.add_option("--solver", o.solver, "meanfield | lindblad | both");
    app.add_option("--jobs", o.jobs, "worker threads for sweeps (default: all cores)");
    app.add_option("--out", o.out, "output directory");
    app.add_option("--baseline", o.baseline, "harmonic | weak");
    app.add_option("--override", o.overrides, "parameter override key=value (repeatable)");
    app.add_flag("--allow-preset-override", o.allow_preset_override, "permit --override on presets");

    auto* simulate = app.add_subcommand("simulate", "single run of the configured system");
    auto* sweep = app.add_subcommand("sweep", "run every point of the configured sweep");
    auto* spectrum = app.add_subcommand("spectrum", "single run plus FID phase spectrum");
    auto* fit = app.add_subcommand("fit-alpha", "drive sweep with a quadratic nonlinear-phase fit");
    std::vector<std::string> compare_dirs;
    auto* cmp = app.add_subcommand("compare", "mean-field vs Lindblad phase ratios");
    cmp->add_option("bundles", compare_dirs, "one bundle with both solvers, or mean-field then Lindblad bundle")
        ->required()
        ->expected(1, 2);
    std::string preset_id;
    auto* pre = app.add_subcommand("preset", "run a frozen figure preset");
    pre->add_option("id", preset_id, "fig2 | fig3 | fig4a | fig4b | fig5a | fig5b | fig5c")->required();
    std::string plot_dir;
    auto* plot = app.add_subcommand("plot-data", "long-format CSV from a bundle");
    plot->add_option("bundle", plot_dir, "result directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (simulate->parsed() || spectrum->parsed()) {
            ExperimentSpec spec = load_spec(o);
            spec.axes.clear();
            spec.write_spectra = spectrum->parsed();
            apply_common(spec, o, false);
            return run_spec(spec);
        }
        if (sweep->parsed()) {
            ExperimentSpec spec = load_spec(o);
            apply_common(spec, o, false);
            return run_spec(spec);
        }
        if (fit->parsed()) {
            ExperimentSpec spec = load_spec(o);
            if (spec.fit_axis.empty()) spec.fit_axis = "pulse.F0_over_kappa";
            apply_common(spec, o, false);
            return run_spec(spec);
        }
        if (cmp->parsed()) return cmd_compare(compare_dirs, o);
        if (pre->parsed()) {
            ExperimentSpec spec = preset(preset_id);
            apply_common(spec, o, true);
            return run_spec(spec);
        }
        if (plot->parsed()) return cmd_plot_data(plot_dir, o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kExitSolver;
    } catch (const ValidationError& e) {
        std::cerr << "validation failure: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSolver;
    }
    return 0;
}
