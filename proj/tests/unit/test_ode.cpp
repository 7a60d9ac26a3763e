#include <doctest.h>

#include <cmath>
#include <vector>

#include "kerrcav/errors.hpp"
#include "kerrcav/ode.hpp"

using namespace kerrcav;

TEST_CASE("complex exponential on a uniform grid") {
    const cplx lambda{-0.5, 40.0};
    const auto rhs = [&](double, std::span<const cplx> y, std::span<cplx> dy) { dy[0] = lambda * y[0]; };
    std::vector<double> times;
    double worst = 0.0;
    const auto obs = [&](std::size_t k, double t, std::span<const cplx> y) {
        CHECK(k == times.size());
        times.push_back(t);
        worst = std::max(worst, std::abs(y[0] - std::exp(lambda * t)));
    };
    const auto stats = integrate_uniform(rhs, {cplx{1.0, 0.0}}, 0.0, 0.01, 501, OdeOptions{}, obs);
    CHECK(times.size() == 501);
    CHECK(times.back() == doctest::Approx(5.0));
    CHECK(worst < 1e-7);
    CHECK(stats.accepted > 0);
    CHECK(stats.rhs_evals >= 6 * stats.accepted);
}

TEST_CASE("dense output stays accurate between coarse steps") {
    // Slowly varying solution: the step is far larger than the output spacing.
    const auto rhs = [](double t, std::span<const cplx> y, std::span<cplx> dy) {
        dy[0] = cplx{0.0, 1.0} * std::cos(t) * y[0];
    };
    double worst = 0.0;
    const auto obs = [&](std::size_t, double t, std::span<const cplx> y) {
        worst = std::max(worst, std::abs(y[0] - std::polar(1.0, std::sin(t))));
    };
    const auto stats = integrate_uniform(rhs, {cplx{1.0, 0.0}}, 0.0, 0.001, 10001, OdeOptions{}, obs);
    CHECK(stats.accepted < 2000);
    CHECK(worst < 1e-8);
}

TEST_CASE("step size cap is honoured") {
    const auto rhs = [](double, std::span<const cplx>, std::span<cplx> dy) { dy[0] = 0.0; };
    OdeOptions o;
    o.h_max = 0.05;
    const auto stats = integrate_uniform(rhs, {cplx{2.0, 0.0}}, 0.0, 1.0, 3, o, [](std::size_t, double, auto y) {
        CHECK(y[0] == cplx{2.0, 0.0});
    });
    CHECK(stats.accepted >= 40);
}

TEST_CASE("finite-time blow-up is reported") {
    const auto rhs = [](double, std::span<const cplx> y, std::span<cplx> dy) { dy[0] = y[0] * y[0]; };
    CHECK_THROWS_AS(integrate_uniform(rhs, {cplx{1.0, 0.0}}, 0.0, 0.1, 21, OdeOptions{}, [](auto...) {}),
                    SolverError);
}

TEST_CASE("step budget exhaustion is reported") {
    const auto rhs = [](double, std::span<const cplx> y, std::span<cplx> dy) { dy[0] = cplx{0.0, 100.0} * y[0]; };
    OdeOptions o;
    o.max_steps = 10;
    CHECK_THROWS_AS(integrate_uniform(rhs, {cplx{1.0, 0.0}}, 0.0, 0.1, 101, o, [](auto...) {}), SolverError);
}
