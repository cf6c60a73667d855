#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "resgrid/netmodel.hpp"
#include "resgrid/scenario.hpp"

using namespace resgrid;

namespace {

Bus mk_bus(const std::string& id, double x, double y) {
    Bus b;
    b.id = id;
    b.x_miles = x;
    b.y_miles = y;
    return b;
}

Line mk_line(const std::string& id, const std::string& a, const std::string& c,
             bool exists = true) {
    Line l;
    l.id = id;
    l.from = a;
    l.to = c;
    l.exists = exists;
    l.resistance = 0.01;
    l.reactance = 0.1;
    l.reduced_reactance = 0.05;
    l.thermal_limit = 100;
    return l;
}

/// Cross of four buses around the origin; l_ew and l_ns have midpoints at
/// the centroid-symmetric positions.
Network cross_net() {
    Network n;
    n.buses = {mk_bus("w", -10, 0), mk_bus("e", 10, 0), mk_bus("s", 0, -10),
               mk_bus("n", 0, 10)};
    n.lines = {mk_line("l_ew", "w", "e"), mk_line("l_ns", "s", "n"),
               mk_line("l_we_n", "w", "n")};
    n.rebuild_indexes();
    return n;
}

}  // namespace

TEST_CASE("failure probability peaks at the percentile") {
    Network n = cross_net();
    // Both axis lines have midpoint exactly at the centroid (origin).
    const double p = line_failure_probability(n.lines[0], n, 5.0, 0.37);
    CHECK(p == doctest::Approx(0.37));
}

TEST_CASE("failure probability vanishes far away") {
    Network n = cross_net();
    n.buses.push_back(mk_bus("far1", 1e4, 1e4));
    n.buses.push_back(mk_bus("far2", 1e4 + 10, 1e4));
    n.lines.push_back(mk_line("l_far", "far1", "far2"));
    n.rebuild_indexes();
    const double p = line_failure_probability(n.lines.back(), n, 5.0, 0.5);
    CHECK(p < 1e-12);
}

TEST_CASE("equidistant lines get equal probabilities") {
    Network n = cross_net();
    const double sigma = 7.0;
    const double p1 = line_failure_probability(n.lines[0], n, sigma, 0.4);
    const double p2 = line_failure_probability(n.lines[1], n, sigma, 0.4);
    CHECK(p1 == doctest::Approx(p2).epsilon(1e-12));
}

TEST_CASE("sampling limits") {
    Network n = cross_net();
    ScenarioSet zero = sample_scenarios(n, 6, 0.0, 5.0, 42);
    for (const auto& s : zero.scenarios) CHECK(s.damaged_lines.empty());

    ScenarioSet sure = sample_scenarios(n, 6, 1.0, 1e9, 42);
    for (const auto& s : sure.scenarios) CHECK(s.damaged_lines.size() == n.lines.size());
}

TEST_CASE("same seed gives identical bytes") {
    Network n = cross_net();
    ScenarioSet a = sample_scenarios(n, 20, 0.5, 6.0, 123);
    ScenarioSet b = sample_scenarios(n, 20, 0.5, 6.0, 123);
    CHECK(save_scenarios(a) == save_scenarios(b));
    ScenarioSet c = sample_scenarios(n, 20, 0.5, 6.0, 124);
    CHECK(save_scenarios(a) != save_scenarios(c));
}

TEST_CASE("raising the percentile only adds damage") {
    Network n = cross_net();
    for (uint64_t seed : {1ull, 77ull, 31337ull}) {
        ScenarioSet lo = sample_scenarios(n, 15, 0.3, 6.0, seed);
        ScenarioSet hi = sample_scenarios(n, 15, 0.8, 6.0, seed);
        for (size_t s = 0; s < lo.scenarios.size(); ++s)
            for (const auto& lid : lo.scenarios[s].damaged_lines)
                CHECK(hi.scenarios[s].damages(lid));
    }
}

TEST_CASE("candidates are never damaged") {
    Network n = cross_net();
    n.lines.push_back(mk_line("cand", "w", "s", false));
    n.rebuild_indexes();
    ScenarioSet s = sample_scenarios(n, 10, 1.0, 1e9, 5);
    for (const auto& sc : s.scenarios) CHECK_FALSE(sc.damages("cand"));
}

TEST_CASE("save/load round-trip") {
    Network n = cross_net();
    ScenarioSet s = sample_scenarios(n, 12, 0.6, 4.0, 2024);
    const std::string text = save_scenarios(s);
    ScenarioSet re = load_scenarios(text, n);
    CHECK(save_scenarios(re) == text);

    ScenarioSet empty;
    empty.rng_seed = 9;
    const std::string etext = save_scenarios(empty);
    ScenarioSet eload = load_scenarios(etext, n);
    CHECK(eload.scenarios.empty());
    CHECK(save_scenarios(eload) == etext);
}

TEST_CASE("unknown line id rejected on load") {
    Network n = cross_net();
    const std::string text = R"({"seed":0,"percentile":0.5,"sigma":3,
      "scenarios":[{"id":0,"damaged_lines":["nope"]}]})";
    CHECK_THROWS_AS(load_scenarios(text, n), NetworkError);
}

TEST_CASE("default sigma is a quarter of the bounding-box diagonal") {
    Network n = cross_net();
    CHECK(default_field_sigma(n) == doctest::Approx(0.25 * std::hypot(20.0, 20.0)));
}
