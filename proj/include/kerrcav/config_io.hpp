// config_io.hpp: `key = value` configuration text and parameter paths
//
// A configuration file is a list of `key = value` lines; `#` starts a comment.
// System keys:
//   cavity.omega_c  cavity.kappa
//   dipoles[n].omega  dipoles[n].U  dipoles[n].gamma  dipoles[n].g
//   pulse.F0  pulse.omega_d  pulse.t0  pulse.T
//   frame = lab | rotating

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kerrcav/model.hpp"

namespace kerrcav {

// Ordered key/value document; keys are unique, insertion order is preserved.
class KeyValueDoc {
public:
    static KeyValueDoc parse(std::string_view text);
    static KeyValueDoc load(const std::string& path);

    void set(const std::string& key, const std::string& value);
    std::optional<std::string> get(const std::string& key) const;
    bool contains(const std::string& key) const { return get(key).has_value(); }
    bool erase(const std::string& key);
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    std::string dump() const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

std::string format_double(double v);
double parse_double(std::string_view text, const std::string& key);

// Extracts system keys; other keys are rejected unless `allow_foreign` is set.
SystemConfig parse_system_config(const KeyValueDoc& doc, bool allow_foreign = false);
SystemConfig parse_system_config(std::string_view text);
void write_system_config(const SystemConfig& cfg, KeyValueDoc& doc);
std::string serialize(const SystemConfig& cfg);

bool is_system_key(std::string_view key);

// Parameter paths accept every numeric system key plus the derived forms
// `pulse.F0_over_kappa` and `dipoles[n].U_over_gamma`; `dipoles[*]` targets
// every well.
void set_parameter(SystemConfig& cfg, const std::string& path, double value);
double get_parameter(const SystemConfig& cfg, const std::string& path);

// Applies `key=value`; `frame` takes a name, all other keys numeric.
void apply_override(SystemConfig& cfg, std::string_view assignment);

std::string frame_name(Frame f);
Frame parse_frame(std::string_view name);

} // namespace kerrcav
