#include <doctest.h>

#include <cmath>

#include "kerrcav/config_io.hpp"
#include "kerrcav/errors.hpp"
#include "kerrcav/experiment.hpp"
#include "kerrcav/presets.hpp"

using namespace kerrcav;

namespace {

const char* kText = R"(# two wells
cavity.omega_c = 40
cavity.kappa = 12
pulse.F0 = 2.4
pulse.omega_d = 40
pulse.t0 = 0.6
pulse.T = 0.155
dipoles[0].omega = 40
dipoles[0].U = 0.3
dipoles[0].gamma = 0.6
dipoles[0].g = 0.7071067811865476
dipoles[1].omega = 41.6
dipoles[1].U = 0.3
dipoles[1].gamma = 0.6
dipoles[1].g = 0.7071067811865476
frame = rotating
)";

} // namespace

TEST_CASE("configuration text parses into a system") {
    const auto cfg = parse_system_config(kText);
    REQUIRE(cfg.size() == 2);
    CHECK(cfg.cavity.kappa == 12.0);
    CHECK(cfg.pulse.amplitude == 2.4);
    CHECK(cfg.dipoles[1].omega == 41.6);
    CHECK(cfg.frame == Frame::RotatingAtDrive);
    CHECK_FALSE(cfg.homogeneous());
}

TEST_CASE("serialization round-trips exactly") {
    const auto cfg = parse_system_config(kText);
    CHECK(parse_system_config(serialize(cfg)) == cfg);
    auto odd = cfg;
    odd.pulse.duration = 0.1 + 0.2;
    odd.dipoles[0].coupling = 1.0 / 3.0;
    odd.frame = Frame::Lab;
    CHECK(parse_system_config(serialize(odd)) == odd);
}

TEST_CASE("every preset configuration round-trips through the parser") {
    for (const auto& id : preset_ids()) {
        const auto spec = preset(id);
        CHECK(parse_system_config(serialize(spec.base)) == spec.base);
    }
}

TEST_CASE("malformed configurations are rejected") {
    CHECK_THROWS_AS(parse_system_config("cavity.kappa = 12\n"), ConfigError);
    std::string dup = std::string(kText) + "cavity.kappa = 13\n";
    CHECK_THROWS_AS(parse_system_config(dup), ConfigError);
    std::string unknown = std::string(kText) + "cavity.q = 3\n";
    CHECK_THROWS_AS(parse_system_config(unknown), ConfigError);
    std::string gap = kText;
    gap.replace(gap.find("dipoles[1]"), 10, "dipoles[2]");
    CHECK_THROWS_AS(parse_system_config(gap), ConfigError);
    std::string nonnum = kText;
    nonnum.replace(nonnum.find("= 2.4"), 5, "= abc");
    CHECK_THROWS_AS(parse_system_config(nonnum), ConfigError);
    std::string negative = kText;
    negative.replace(negative.find("dipoles[0].gamma = 0.6"), 22, "dipoles[0].gamma = -1");
    CHECK_THROWS_AS(parse_system_config(negative), ConfigError);
}

TEST_CASE("parameter paths") {
    auto cfg = parse_system_config(kText);
    set_parameter(cfg, "pulse.F0_over_kappa", 0.25);
    CHECK(cfg.pulse.amplitude == doctest::Approx(3.0));
    CHECK(get_parameter(cfg, "pulse.F0_over_kappa") == doctest::Approx(0.25));
    set_parameter(cfg, "dipoles[*].U_over_gamma", 2.0);
    CHECK(cfg.dipoles[0].anharmonicity == doctest::Approx(1.2));
    CHECK(cfg.dipoles[1].anharmonicity == doctest::Approx(1.2));
    set_parameter(cfg, "dipoles[1].gamma", 0.9);
    CHECK(get_parameter(cfg, "dipoles[1].gamma") == 0.9);
    CHECK(get_parameter(cfg, "cavity.omega_c") == 40.0);
    CHECK_THROWS_AS(set_parameter(cfg, "dipoles[5].gamma", 1.0), ConfigError);
    CHECK_THROWS_AS(get_parameter(cfg, "pulse.width"), ConfigError);

    apply_override(cfg, "cavity.kappa = 10");
    CHECK(cfg.cavity.kappa == 10.0);
    apply_override(cfg, "frame=lab");
    CHECK(cfg.frame == Frame::Lab);
    CHECK_THROWS_AS(apply_override(cfg, "cavity.kappa"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "cavity.kappa=-1"), ConfigError);
}

TEST_CASE("experiment keys") {
    std::string text = std::string(kText) +
                       "solver = both\n"
                       "sweep.pulse.F0_over_kappa = 0.05:0.25:5\n"
                       "sweep.dipoles[1].gamma = 0.3, 0.9\n"
                       "baseline = weak\n"
                       "fit.axis = pulse.F0_over_kappa\n"
                       "hilbert.n_photon_max = 6\n";
    const auto spec = parse_experiment(KeyValueDoc::parse(text));
    CHECK(spec.solver == SolverChoice::Both);
    REQUIRE(spec.axes.size() == 2);
    CHECK(spec.axes[0].values.size() == 5);
    CHECK(spec.axes[0].values[4] == doctest::Approx(0.25));
    CHECK(spec.axes[1].values == std::vector<double>{0.3, 0.9});
    CHECK(spec.baseline == BaselineMode::WeakDrive);
    CHECK(spec.hilbert.n_photon_max == 6);
    CHECK(spec.point_count() == 10);

    CHECK_THROWS_AS(parse_experiment(KeyValueDoc::parse(std::string(kText) + "sweep.pulse.width = 1,2\n")), ConfigError);
    CHECK_THROWS_AS(parse_experiment(KeyValueDoc::parse(std::string(kText) + "colour = red\n")), ConfigError);
    CHECK_THROWS_AS(parse_experiment(KeyValueDoc::parse(std::string(kText) + "solver = exact\n")), ConfigError);
    CHECK_THROWS_AS(parse_value_list("1:2", "k"), ConfigError);
}
