#include "kerrcav/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "kerrcav/errors.hpp"
#include "kerrcav/export.hpp"
#include "kerrcav/kernels.hpp"
#include "kerrcav/lindblad.hpp"

namespace kerrcav {
namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool parse_bool(std::string_view v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("key '" + key + "' expects true or false");
}

std::string point_tag(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "point_%04zu", index);
    return buf;
}

std::string describe_point(const std::vector<std::string>& paths, const PointResult& p) {
    std::string s = "sweep point " + std::to_string(p.index);
    if (!paths.empty()) {
        s += " (";
        for (std::size_t i = 0; i < paths.size(); ++i) {
            if (i) s += ", ";
            s += paths[i] + "=" + format_double(p.coords[i]);
        }
        s += ")";
    }
    return s + ": ";
}

[[noreturn]] void rethrow_with(const std::string& where) {
    try {
        throw;
    } catch (const ConfigError& e) {
        throw ConfigError(where + e.what());
    } catch (const SolverError& e) {
        throw SolverError(where + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(where + e.what());
    } catch (const std::exception& e) {
        throw SolverError(where + e.what());
    }
}

std::vector<std::vector<double>> cartesian(const std::vector<SweepAxis>& axes) {
    std::vector<std::vector<double>> out{{}};
    for (const auto& axis : axes) {
        std::vector<std::vector<double>> next;
        for (const auto& prefix : out)
            for (double v : axis.values) {
                auto p = prefix;
                p.push_back(v);
                next.push_back(std::move(p));
            }
        out = std::move(next);
    }
    return out;
}

double meanfield_phase(const MeanFieldTrajectory& run, const MeanFieldTrajectory& base, SignalSource source,
                       const ExperimentSpec& spec) {
    return nonlinear_phase(fid_window(run, source, spec.fid), fid_window(base, source, spec.fid), spec.spectral);
}

double lindblad_phase(const LindbladSeries& run, const LindbladSeries& base, const ExperimentSpec& spec) {
    return nonlinear_phase(fid_window(run, spec.source, spec.fid), fid_window(base, spec.source, spec.fid),
                           spec.spectral);
}

void run_point(const ExperimentSpec& spec, PointResult& p, std::vector<std::pair<std::string, std::string>>& files) {
    const std::string dir = spec.output_dir;
    const std::string tag = point_tag(p.index);
    const SystemConfig base_cfg = baseline_config(p.config, spec.baseline);
    auto emit = [&](const std::string& name, const std::string& kind, const std::string& content) {
        if (dir.empty()) return;
        write_text_file((std::filesystem::path(dir) / name).string(), content);
        files.emplace_back(name, kind);
    };
    emit(tag + "_config.json", "config", config_json(p.config).dump(2) + "\n");
    // Without a drive there is no FID and the nonlinear phase is left undefined.
    const bool driven = p.config.pulse.amplitude != 0.0;

    if (spec.solver != SolverChoice::Lindblad) {
        IntegrationOptions opts;
        opts.t_end = spec.t_end;
        auto run = std::make_shared<const MeanFieldTrajectory>(integrate(p.config, opts));
        const MeanFieldTrajectory base = integrate(base_cfg, opts);
        if (driven) {
            p.phase_meanfield = meanfield_phase(*run, base, spec.source, spec);
            p.phase_dipole_meanfield = meanfield_phase(*run, base, SignalSource::Dipole, spec);
        }
        if (spec.write_series) emit(tag + "_meanfield.csv", "meanfield-trajectory", trajectory_csv(*run));
        if (spec.write_spectra && driven) {
            const auto s = fourier(fid_window(*run, spec.source, spec.fid), spec.spectral);
            emit(tag + "_spectrum.csv", "spectrum", spectrum_csv(s, phase_spectrum(s)));
        }
        p.trajectory = std::move(run);
    }

    if (spec.solver != SolverChoice::MeanField) {
        LindbladOptions opts;
        opts.t_end = spec.t_end;
        HilbertConfig h = spec.hilbert;
        h.wells = static_cast<int>(p.config.size());
        LindbladSeries series;
        if (!driven) {
            series = evolve(p.config, h, opts);
        } else if (spec.auto_truncation) {
            auto metric = [&](const LindbladSeries& s) {
                return lindblad_phase(s, evolve(base_cfg, s.hilbert, opts), spec);
            };
            auto conv = evolve_converged(p.config, h, opts, metric);
            if (!conv.converged) throw SolverError("photon truncation did not converge");
            series = std::move(conv.series);
            p.phase_lindblad = conv.history.back().second;
        } else {
            series = evolve(p.config, h, opts);
            p.phase_lindblad = lindblad_phase(series, evolve(base_cfg, h, opts), spec);
        }
        p.n_photon_max = series.hilbert.n_photon_max;
        if (series.hilbert.nu_max >= 2) {
            const auto p2 = second_level_population(series, 0);
            p.max_p2 = *std::max_element(p2.begin(), p2.end());
        }
        if (spec.write_series) emit(tag + "_lindblad.csv", "lindblad-series", lindblad_csv(series));
    }
}

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

} // namespace

std::string solver_name(SolverChoice s) {
    switch (s) {
    case SolverChoice::MeanField: return "meanfield";
    case SolverChoice::Lindblad: return "lindblad";
    case SolverChoice::Both: return "both";
    }
    return "meanfield";
}

SolverChoice parse_solver(std::string_view name) {
    if (name == "meanfield") return SolverChoice::MeanField;
    if (name == "lindblad") return SolverChoice::Lindblad;
    if (name == "both") return SolverChoice::Both;
    throw ConfigError("unknown solver '" + std::string(name) + "' (expected meanfield, lindblad or both)");
}

void ExperimentSpec::validate() const {
    kerrcav::validate(base);
    for (const auto& axis : axes) {
        if (axis.values.empty()) throw ConfigError("sweep axis '" + axis.path + "' has no values");
        (void)get_parameter(base, axis.path);
    }
    if (!fit_axis.empty()) (void)get_parameter(base, fit_axis);
    if (solver != SolverChoice::MeanField) {
        HilbertConfig h = hilbert;
        h.wells = static_cast<int>(base.size());
        if (auto_truncation) h.n_photon_max += 8;
        h.validate();
    }
}

std::size_t ExperimentSpec::point_count() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
}

std::vector<double> parse_value_list(std::string_view text, const std::string& key) {
    std::vector<double> out;
    if (text.find(':') != std::string_view::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) throw ConfigError("range for '" + key + "' must be start:stop:count");
        const double a = parse_double(parts[0], key);
        const double b = parse_double(parts[1], key);
        const double n = parse_double(parts[2], key);
        if (!(n >= 1.0) || n != std::floor(n)) throw ConfigError("range count for '" + key + "' must be a positive integer");
        const auto count = static_cast<std::size_t>(n);
        for (std::size_t i = 0; i < count; ++i)
            out.push_back(count == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
        return out;
    }
    for (const auto& part : split(text, ','))
        if (!part.empty()) out.push_back(parse_double(part, key));
    if (out.empty()) throw ConfigError("'" + key + "' lists no values");
    return out;
}

ExperimentSpec parse_experiment(const KeyValueDoc& doc) {
    ExperimentSpec spec;
    spec.base = parse_system_config(doc, true);
    for (const auto& [key, value] : doc.entries()) {
        if (is_system_key(key)) continue;
        if (key == "name") spec.name = value;
        else if (key == "solver") spec.solver = parse_solver(value);
        else if (key.rfind("sweep.", 0) == 0) spec.axes.push_back({key.substr(6), parse_value_list(value, key)});
        else if (key == "baseline") spec.baseline = parse_baseline(value);
        else if (key == "source") {
            if (value == "cavity") spec.source = SignalSource::Cavity;
            else if (value == "dipole") spec.source = SignalSource::Dipole;
            else throw ConfigError("source must be cavity or dipole");
        } else if (key == "fid.offset_T") spec.fid.offset_durations = parse_double(value, key);
        else if (key == "fid.t_off") spec.fid.t_off = parse_double(value, key);
        else if (key == "fit.axis") spec.fit_axis = value;
        else if (key == "fit.x_min") spec.fit.x_min = parse_double(value, key);
        else if (key == "fit.x_max") spec.fit.x_max = parse_double(value, key);
        else if (key == "hilbert.n_photon_max") spec.hilbert.n_photon_max = static_cast<int>(parse_double(value, key));
        else if (key == "hilbert.nu_max") spec.hilbert.nu_max = static_cast<int>(parse_double(value, key));
        else if (key == "hilbert.auto") spec.auto_truncation = parse_bool(value, key);
        else if (key == "t_end") spec.t_end = parse_double(value, key);
        else if (key == "delay.reference") spec.delay_reference = parse_double(value, key);
        else throw ConfigError("unknown key '" + key + "'");
    }
    spec.validate();
    return spec;
}

ExperimentResult run(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentResult result;
    for (const auto& a : spec.axes) result.axis_paths.push_back(a.path);

    const auto grid = cartesian(spec.axes);
    result.points.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto& p = result.points[i];
        p.index = i;
        p.coords = grid[i];
        p.config = spec.base;
        try {
            for (std::size_t a = 0; a < spec.axes.size(); ++a) set_parameter(p.config, spec.axes[a].path, grid[i][a]);
            validate(p.config);
        } catch (...) {
            rethrow_with(describe_point(result.axis_paths, p));
        }
    }
    if (!spec.output_dir.empty()) std::filesystem::create_directories(spec.output_dir);

    unsigned jobs = spec.jobs != 0 ? spec.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(1, grid.size())));
    std::vector<std::vector<std::pair<std::string, std::string>>> files(grid.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (!failed.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= grid.size()) return;
            try {
                try {
                    run_point(spec, result.points[i], files[i]);
                } catch (...) {
                    rethrow_with(describe_point(result.axis_paths, result.points[i]));
                }
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed = true;
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    Manifest manifest;
    for (const auto& f : files)
        for (const auto& [path, kind] : f) manifest.add(path, kind);

    // Alpha fits along the fit axis, grouped by the remaining coordinates.
    if (!spec.fit_axis.empty()) {
        const auto it = std::find(result.axis_paths.begin(), result.axis_paths.end(), spec.fit_axis);
        const auto fit_index = static_cast<std::size_t>(it - result.axis_paths.begin());
        std::map<std::vector<double>, std::vector<std::size_t>> groups;
        for (const auto& p : result.points) {
            auto key = p.coords;
            if (it != result.axis_paths.end()) key.erase(key.begin() + static_cast<std::ptrdiff_t>(fit_index));
            groups[key].push_back(p.index);
        }
        for (const auto& [key, members] : groups) {
            const SystemConfig& cfg = result.points[members.front()].config;
            if (!(cfg.dipoles.front().anharmonicity > 0.0)) continue;
            for (SolverChoice which : {SolverChoice::MeanField, SolverChoice::Lindblad}) {
                std::vector<std::pair<double, double>> pts;
                for (std::size_t m : members) {
                    const auto& p = result.points[m];
                    const auto& v = which == SolverChoice::MeanField ? p.phase_meanfield : p.phase_lindblad;
                    if (v) pts.emplace_back(get_parameter(p.config, spec.fit_axis), *v);
                }
                if (pts.empty()) continue;
                result.fits.push_back({key, solver_name(which), fit_alpha(pts, cfg, spec.fit)});
            }
        }
    }

    if (spec.output_dir.empty()) return result;
    const std::filesystem::path dir(spec.output_dir);

    if (spec.delay_reference) {
        const double ref = *spec.delay_reference;
        for (const auto& p : result.points) {
            if (!p.trajectory) continue;
            const double x = get_parameter(p.config, "pulse.F0_over_kappa");
            if (std::abs(x - ref) < 1e-12) continue;
            for (const auto& q : result.points) {
                if (!q.trajectory || std::abs(get_parameter(q.config, "pulse.F0_over_kappa") - ref) > 1e-12) continue;
                SystemConfig a = p.config, b = q.config;
                a.pulse.amplitude = b.pulse.amplitude = 0.0;
                if (!(a == b)) continue;
                const std::string name = point_tag(p.index) + "_delay.csv";
                write_text_file((dir / name).string(), delay_csv(time_delay(*p.trajectory, *q.trajectory)));
                manifest.add(name, "time-delay");
                break;
            }
        }
    }

    write_text_file((dir / "points.csv").string(), points_csv(result));
    manifest.add("points.csv", "phase-table");
    if (!result.fits.empty()) {
        nlohmann::json fits = nlohmann::json::array();
        for (const auto& f : result.fits) {
            nlohmann::json j = fit_json(f.fit);
            j["solver"] = f.solver;
            j["group"] = f.coords;
            fits.push_back(j);
        }
        write_text_file((dir / "fits.json").string(), fits.dump(2) + "\n");
        manifest.add("fits.json", "alpha-fits");
    }
    nlohmann::json extra;
    extra["name"] = spec.name;
    extra["solver"] = solver_name(spec.solver);
    extra["baseline"] = baseline_name(spec.baseline);
    extra["source"] = source_name(spec.source);
    extra["axes"] = result.axis_paths;
    extra["points"] = result.points.size();
    extra["base_config"] = config_json(spec.base);
    extra["t_off"] = fid_start(spec.base, spec.fid);
    extra["fourier_convention"] = "(1/sqrt(2 pi)) int dt x(t) exp(+i omega t)";
    extra["kernel_isa"] = std::string(kernels::isa_name(kernels::active_isa()));
    manifest.write(spec.output_dir, config_hash(spec.base), extra);
    return result;
}

std::string points_csv(const ExperimentResult& result) {
    std::string out = "index";
    for (const auto& a : result.axis_paths) out += "," + a;
    out += ",phase_meanfield,phase_dipole_meanfield,phase_lindblad,max_p2,n_photon_max\n";
    for (const auto& p : result.points) {
        out += std::to_string(p.index);
        for (double c : p.coords) out += "," + format_double(c);
        out += "," + cell(p.phase_meanfield) + "," + cell(p.phase_dipole_meanfield) + "," + cell(p.phase_lindblad) +
               "," + cell(p.max_p2) + "," + (p.n_photon_max > 0 ? std::to_string(p.n_photon_max) : std::string()) +
               "\n";
    }
    return out;
}

PhaseTable load_phase_table(const std::string& dir, const std::string& column) {
    const auto path = (std::filesystem::path(dir) / "points.csv").string();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("'" + path + "' is empty");
    const auto header = split(line, ',');
    const auto col = std::find(header.begin(), header.end(), column);
    const auto first_result = std::find(header.begin(), header.end(), "phase_meanfield");
    if (col == header.end() || first_result == header.end())
        throw ConfigError("'" + path + "' has no column '" + column + "'");
    PhaseTable t;
    t.axes.assign(header.begin() + 1, first_result);
    const auto col_index = static_cast<std::size_t>(col - header.begin());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != header.size()) throw ConfigError("malformed row in '" + path + "'");
        std::vector<double> coords;
        for (std::size_t a = 0; a < t.axes.size(); ++a) coords.push_back(parse_double(cells[1 + a], path));
        t.coords.push_back(std::move(coords));
        t.values.push_back(cells[col_index].empty() ? kNaN : parse_double(cells[col_index], path));
    }
    return t;
}

PhaseTable phase_table(const ExperimentResult& result, SolverChoice which) {
    PhaseTable t;
    t.axes = result.axis_paths;
    for (const auto& p : result.points) {
        t.coords.push_back(p.coords);
        const auto& v = which == SolverChoice::Lindblad ? p.phase_lindblad : p.phase_meanfield;
        t.values.push_back(v.value_or(kNaN));
    }
    return t;
}

CompareReport compare(const PhaseTable& meanfield, const PhaseTable& lindblad) {
    if (meanfield.axes != lindblad.axes) throw ValidationError("bundles sweep different axes");
    if (meanfield.coords != lindblad.coords) throw ValidationError("bundles sweep different points");
    CompareReport r;
    r.axes = meanfield.axes;
    r.max_ratio = -std::numeric_limits<double>::infinity();
    r.min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < meanfield.coords.size(); ++i) {
        const double mf = meanfield.values[i];
        const double lb = lindblad.values[i];
        if (std::isnan(mf) || std::isnan(lb)) throw ValidationError("bundle lacks a phase at point " + std::to_string(i));
        CompareRow row;
        row.coords = meanfield.coords[i];
        row.meanfield = mf;
        row.lindblad = lb;
        row.ratio = (mf == lb) ? 1.0 : lb / mf;
        row.agree = row.ratio >= 0.5 && row.ratio <= 2.0;
        r.all_agree = r.all_agree && row.agree;
        r.max_ratio = std::max(r.max_ratio, row.ratio);
        r.min_ratio = std::min(r.min_ratio, row.ratio);
        r.rows.push_back(std::move(row));
    }
    return r;
}

std::string compare_csv(const CompareReport& report) {
    std::string out;
    for (const auto& a : report.axes) out += a + ",";
    out += "phase_meanfield,phase_lindblad,ratio,regime\n";
    for (const auto& row : report.rows) {
        for (double c : row.coords) out += format_double(c) + ",";
        out += format_double(row.meanfield) + "," + format_double(row.lindblad) + "," + format_double(row.ratio) + "," +
               (row.agree ? "agreement" : "breakdown") + "\n";
    }
    return out;
}

} // namespace kerrcav
