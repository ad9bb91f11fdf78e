#include <doctest.h>

#include "polar/continuation.hpp"

#include <cmath>

using namespace polar;

TEST_SUITE("continuation") {

TEST_CASE("parameter maps")
{
    const ParameterMap e = energy_map(0.01, EnergyConvention::MoonCentered);
    CHECK(e.mu(-1.0) == 0.01);
    CHECK(e.solver_energy(-1.7) == doctest::Approx(hill_energy_from_moon_centered(-1.7, 0.01)));
    CHECK(e.to_internal(-1.7) == -1.7);

    const ParameterMap m = mass_map(-2.0);
    CHECK(m.mu(0.125) == 0.125);
    CHECK(m.to_internal(0.125) == doctest::Approx(0.5));
    CHECK(m.from_internal(0.5) == doctest::Approx(0.125));
    CHECK(m.solver_energy(0.125) == doctest::Approx(hill_energy_from_moon_centered(-2.0, 0.125)));

    const ParameterMap b = energy_map(0.01215, EnergyConvention::Barycentric);
    const double hm = moon_centered_energy_from_barycentric(-1.52, 0.01215);
    CHECK(b.solver_energy(-1.52) == doctest::Approx(hill_energy_from_moon_centered(hm, 0.01215)));
}

TEST_CASE("step configuration validation")
{
    StepConfig s;
    CHECK_NOTHROW(s.validate());
    s.min = 0.1;
    s.max = 0.01;
    CHECK_THROWS(s.validate());
    s = {};
    s.shrink = 1.5;
    CHECK_THROWS(s.validate());
}

TEST_CASE("energy path lands on the grid")
{
    StepConfig st;
    st.grid = 0.05;
    const auto run = continue_in_h(0.0, -1.2, -1.0, st);
    CHECK_FALSE(run.truncated);
    for (int k = 0; k <= 4; ++k) {
        const double g = -1.2 + 0.05 * k;
        int hits = 0;
        for (const auto& pt : run.path)
            hits += std::abs(pt.parameter - g) < 1e-15;
        CHECK(hits == 1);
    }
    for (const auto& pt : run.path) {
        CHECK(pt.orbit.residual < 1e-10);
        CHECK(pt.spectrum.has_value());
    }
}

TEST_CASE("empty range yields the single start point")
{
    const auto run = continue_in_h(0.0, -1.0, -1.0);
    CHECK(run.path.size() == 1);
    CHECK(detect_events(run, default_stability()).empty());
}

TEST_CASE("period doubling at mu = 0 is bracketed")
{
    StepConfig st;
    st.max = 0.02;
    const auto run = continue_in_h(0.0, -1.06, -1.0, st);
    EventConfig ev;
    ev.bracket_tol = 1e-7;
    const auto events = detect_events(run, default_stability(), ev);
    REQUIRE(events.size() == 1);
    CHECK(events[0].kind == EventKind::PeriodDoubling);
    CHECK(events[0].resolved);
    CHECK(events[0].bracket[1] - events[0].bracket[0] <= 1e-7);
    CHECK(events[0].bracket[0] > -1.0253);
    CHECK(events[0].bracket[1] < -1.0252);
}

TEST_CASE("mass homotopy reaches interior mass ratios")
{
    const OrbitRecord rec = orbit_at(0.2, -1.0);
    CHECK(rec.section.mu == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(rec.residual < 1e-10);
}

}
