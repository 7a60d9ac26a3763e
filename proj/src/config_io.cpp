#include "kerrcav/config_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "kerrcav/errors.hpp"

namespace kerrcav {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct DipoleKey {
    bool all{false};
    std::size_t index{0};
    std::string field;
};

std::optional<DipoleKey> parse_dipole_key(const std::string& key) {
    static const std::regex re(R"(dipoles\[(\*|\d+)\]\.(\w+))");
    std::smatch m;
    if (!std::regex_match(key, m, re)) return std::nullopt;
    DipoleKey k;
    if (m[1] == "*") k.all = true;
    else k.index = static_cast<std::size_t>(std::stoul(m[1]));
    k.field = m[2];
    return k;
}

double& dipole_field(DipoleParams& d, const std::string& field, const std::string& key) {
    if (field == "omega") return d.omega;
    if (field == "U") return d.anharmonicity;
    if (field == "gamma") return d.gamma;
    if (field == "g") return d.coupling;
    throw ConfigError("unknown dipole field in '" + key + "'");
}

double* scalar_field(SystemConfig& cfg, const std::string& key) {
    if (key == "cavity.omega_c") return &cfg.cavity.omega_c;
    if (key == "cavity.kappa") return &cfg.cavity.kappa;
    if (key == "pulse.F0") return &cfg.pulse.amplitude;
    if (key == "pulse.omega_d") return &cfg.pulse.carrier;
    if (key == "pulse.t0") return &cfg.pulse.center;
    if (key == "pulse.T") return &cfg.pulse.duration;
    return nullptr;
}

constexpr std::string_view kScalarKeys[] = {"cavity.omega_c", "cavity.kappa", "pulse.F0",
                                            "pulse.omega_d",  "pulse.t0",     "pulse.T"};
constexpr std::string_view kDipoleFields[] = {"omega", "U", "gamma", "g"};

} // namespace

KeyValueDoc KeyValueDoc::parse(std::string_view text) {
    KeyValueDoc doc;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        if (doc.contains(key)) throw ConfigError("duplicate key '" + key + "'");
        doc.entries_.emplace_back(key, value);
    }
    return doc;
}

KeyValueDoc KeyValueDoc::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void KeyValueDoc::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

std::optional<std::string> KeyValueDoc::get(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return v;
    return std::nullopt;
}

bool KeyValueDoc::erase(const std::string& key) {
    const auto it = std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
    if (it == entries_.end()) return false;
    entries_.erase(it);
    return true;
}

std::string KeyValueDoc::dump() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
    return out;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, const std::string& key) {
    text = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw ConfigError("key '" + key + "': '" + std::string(text) + "' is not a number");
    return v;
}

std::string frame_name(Frame f) { return f == Frame::Lab ? "lab" : "rotating"; }

Frame parse_frame(std::string_view name) {
    name = trim(name);
    if (name == "lab") return Frame::Lab;
    if (name == "rotating") return Frame::RotatingAtDrive;
    throw ConfigError("frame must be 'lab' or 'rotating', got '" + std::string(name) + "'");
}

bool is_system_key(std::string_view key) {
    if (key == "frame") return true;
    if (std::find(std::begin(kScalarKeys), std::end(kScalarKeys), key) != std::end(kScalarKeys)) return true;
    const auto dk = parse_dipole_key(std::string(key));
    return dk && !dk->all &&
           std::find(std::begin(kDipoleFields), std::end(kDipoleFields), dk->field) != std::end(kDipoleFields);
}

SystemConfig parse_system_config(const KeyValueDoc& doc, bool allow_foreign) {
    SystemConfig cfg;
    std::map<std::string, bool> seen;
    std::map<std::size_t, std::map<std::string, double>> wells;
    for (const auto& [key, value] : doc.entries()) {
        if (key == "frame") {
            cfg.frame = parse_frame(value);
            continue;
        }
        if (double* field = scalar_field(cfg, key)) {
            *field = parse_double(value, key);
            seen[key] = true;
            continue;
        }
        if (const auto dk = parse_dipole_key(key); dk && !dk->all) {
            DipoleParams probe;
            (void)dipole_field(probe, dk->field, key);
            wells[dk->index][dk->field] = parse_double(value, key);
            continue;
        }
        if (!allow_foreign) throw ConfigError("unknown key '" + key + "'");
    }
    for (auto k : kScalarKeys)
        if (!seen.count(std::string(k))) throw ConfigError("missing key '" + std::string(k) + "'");
    if (wells.empty()) throw ConfigError("no dipoles[n] entries");
    if (wells.rbegin()->first + 1 != wells.size()) throw ConfigError("dipole indices must be contiguous from 0");
    cfg.dipoles.assign(wells.size(), DipoleParams{});
    for (const auto& [idx, fields] : wells) {
        for (auto f : kDipoleFields) {
            const std::string name(f);
            const auto it = fields.find(name);
            const std::string key = "dipoles[" + std::to_string(idx) + "]." + name;
            if (it == fields.end()) throw ConfigError("missing key '" + key + "'");
            dipole_field(cfg.dipoles[idx], name, key) = it->second;
        }
    }
    validate(cfg);
    return cfg;
}

SystemConfig parse_system_config(std::string_view text) { return parse_system_config(KeyValueDoc::parse(text)); }

void write_system_config(const SystemConfig& cfg, KeyValueDoc& doc) {
    doc.set("cavity.omega_c", format_double(cfg.cavity.omega_c));
    doc.set("cavity.kappa", format_double(cfg.cavity.kappa));
    for (std::size_t n = 0; n < cfg.dipoles.size(); ++n) {
        const auto& d = cfg.dipoles[n];
        const std::string p = "dipoles[" + std::to_string(n) + "].";
        doc.set(p + "omega", format_double(d.omega));
        doc.set(p + "U", format_double(d.anharmonicity));
        doc.set(p + "gamma", format_double(d.gamma));
        doc.set(p + "g", format_double(d.coupling));
    }
    doc.set("pulse.F0", format_double(cfg.pulse.amplitude));
    doc.set("pulse.omega_d", format_double(cfg.pulse.carrier));
    doc.set("pulse.t0", format_double(cfg.pulse.center));
    doc.set("pulse.T", format_double(cfg.pulse.duration));
    doc.set("frame", frame_name(cfg.frame));
}

std::string serialize(const SystemConfig& cfg) {
    KeyValueDoc doc;
    write_system_config(cfg, doc);
    return doc.dump();
}

void set_parameter(SystemConfig& cfg, const std::string& path, double value) {
    if (double* field = scalar_field(cfg, path)) {
        *field = value;
        return;
    }
    if (path == "pulse.F0_over_kappa") {
        cfg.pulse.amplitude = value * cfg.cavity.kappa;
        return;
    }
    const auto dk = parse_dipole_key(path);
    if (!dk) throw ConfigError("unknown parameter path '" + path + "'");
    auto apply = [&](DipoleParams& d) {
        if (dk->field == "U_over_gamma") d.anharmonicity = value * d.gamma;
        else dipole_field(d, dk->field, path) = value;
    };
    if (dk->all) {
        for (auto& d : cfg.dipoles) apply(d);
        return;
    }
    if (dk->index >= cfg.dipoles.size()) throw ConfigError("parameter path '" + path + "': no such dipole");
    apply(cfg.dipoles[dk->index]);
}

double get_parameter(const SystemConfig& cfg, const std::string& path) {
    auto& mut = const_cast<SystemConfig&>(cfg);
    if (double* field = scalar_field(mut, path)) return *field;
    if (path == "pulse.F0_over_kappa") return cfg.pulse.amplitude / cfg.cavity.kappa;
    const auto dk = parse_dipole_key(path);
    if (!dk) throw ConfigError("unknown parameter path '" + path + "'");
    const std::size_t idx = dk->all ? 0 : dk->index;
    if (idx >= cfg.dipoles.size()) throw ConfigError("parameter path '" + path + "': no such dipole");
    auto& d = mut.dipoles[idx];
    if (dk->field == "U_over_gamma") return d.anharmonicity / d.gamma;
    return dipole_field(d, dk->field, path);
}

void apply_override(SystemConfig& cfg, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError("override must be key=value: '" + std::string(assignment) + "'");
    const std::string key(trim(assignment.substr(0, eq)));
    const std::string_view value = trim(assignment.substr(eq + 1));
    if (key == "frame") cfg.frame = parse_frame(value);
    else set_parameter(cfg, key, parse_double(value, key));
    validate(cfg);
}

} // namespace kerrcav
