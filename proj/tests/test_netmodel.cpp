#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "resgrid/netmodel.hpp"
#include "resgrid/rng.hpp"

using namespace resgrid;

namespace {

const char* kTwoBus = R"({
  "buses": [
    {"id": "b1", "location": [0, 0], "demand_p": 0, "demand_q": 0,
     "existing_gen_p_max": 200, "existing_gen_q_min": -60, "existing_gen_q_max": 60},
    {"id": "b2", "location": [10, 0], "demand_p": 100, "demand_q": 30, "is_critical": true}
  ],
  "lines": [
    {"id": "l1", "from": "b1", "to": "b2", "resistance": 0.01, "reactance": 0.1,
     "thermal_limit": 150}
  ],
  "params": {"theta_u": 0.2618, "lp_cr": 0.99}
})";

Network random_network(Rng& rng) {
    Network net;
    const int nb = 2 + int(rng.below(5));
    for (int i = 0; i < nb; ++i) {
        Bus b;
        b.id = "b" + std::to_string(i);
        b.x_miles = rng.uniform(-50, 50);
        b.y_miles = rng.uniform(-50, 50);
        b.demand_p = rng.uniform(0, 200);
        b.demand_q = rng.uniform(0, 60);
        b.is_critical = rng.next_double() < 0.4;
        b.existing_gen_p_max = rng.next_double() < 0.5 ? rng.uniform(0, 300) : 0.0;
        b.existing_gen_q_max = b.existing_gen_p_max / 2;
        b.existing_gen_q_min = -b.existing_gen_q_max;
        b.new_gen_p_cap = rng.next_double() < 0.3 ? rng.uniform(50, 200) : 0.0;
        b.new_gen_q_cap = b.new_gen_p_cap / 2;
        b.cost_gen_facility = rng.uniform(1e4, 1e6);
        b.cost_gen_capacity = rng.uniform(1e3, 1e5);
        net.buses.push_back(b);
    }
    const int nl = 1 + int(rng.below(6));
    for (int i = 0; i < nl; ++i) {
        Line l;
        l.id = "l" + std::to_string(i);
        int a = int(rng.below(uint64_t(nb)));
        int b = int(rng.below(uint64_t(nb)));
        if (a == b) b = (b + 1) % nb;
        l.from = "b" + std::to_string(a);
        l.to = "b" + std::to_string(b);
        l.exists = rng.next_double() < 0.8;
        l.resistance = rng.uniform(0.0, 0.05);
        l.reactance = rng.uniform(0.02, 0.3);
        l.reduced_reactance = 0.5 * l.reactance;
        l.thermal_limit = rng.uniform(50, 400);
        l.cost_build = rng.uniform(1e5, 5e6);
        l.cost_switch = rng.uniform(500, 2000);
        l.cost_harden = rng.uniform(1e3, 1e5);
        l.cost_facts = rng.uniform(1e4, 1e5);
        l.cost_pst = rng.uniform(1e4, 1e5);
        l.can_facts = rng.next_double() < 0.5;
        net.lines.push_back(l);
    }
    net.rebuild_indexes();
    return net;
}

}  // namespace

TEST_CASE("minimal two-bus file parses") {
    Network net = parse_network(kTwoBus);
    CHECK(net.buses.size() == 2);
    CHECK(net.lines.size() == 1);
    CHECK(net.bus("b2").is_critical);
    CHECK(net.params.lp_cr == doctest::Approx(0.99));
    // defaults
    CHECK(net.params.theta_m == doctest::Approx(3.14159265));
    CHECK(net.lines[0].reduced_reactance == doctest::Approx(0.05));
    CHECK(net.line_length(net.lines[0]) == doctest::Approx(10.0));
}

TEST_CASE("dangling bus reference is a semantic error naming the bus") {
    std::string text = kTwoBus;
    auto pos = text.find("\"to\": \"b2\"");
    text.replace(pos, 10, "\"to\": \"b99\"");
    try {
        parse_network(text);
        FAIL("expected NetworkError");
    } catch (const NetworkError& e) {
        CHECK(std::string(e.what()).find("b99") != std::string::npos);
        CHECK(e.where().find("lines[0].to") != std::string::npos);
    }
}

TEST_CASE("syntax error carries line/column") {
    try {
        parse_network("{\n  \"buses\": [,]\n}");
        FAIL("expected NetworkError");
    } catch (const NetworkError& e) {
        CHECK(e.where().find("line") != std::string::npos);
        CHECK(e.where().find("column") != std::string::npos);
    }
}

TEST_CASE("semantic invariants rejected with field path") {
    std::string text = kTwoBus;
    auto pos = text.find("\"thermal_limit\": 150");
    text.replace(pos, 20, "\"thermal_limit\": -5");
    try {
        parse_network(text);
        FAIL("expected NetworkError");
    } catch (const NetworkError& e) {
        CHECK(e.where().find("lines[0]") != std::string::npos);
    }
}

TEST_CASE("serialize/parse round-trip is the identity on canonical form") {
    Rng rng(20240811);
    for (int trial = 0; trial < 40; ++trial) {
        Network net = random_network(rng);
        const std::string canon = serialize_network(net);
        Network re = parse_network(canon);
        CHECK(serialize_network(re) == canon);
    }
}

TEST_CASE("admittance: pure reactance") {
    Line l;
    l.id = "l";
    l.resistance = 0.0;
    l.reactance = 1.0;
    l.reduced_reactance = 0.5;
    auto [g, b] = admittance_of(l, false);
    CHECK(g == doctest::Approx(0.0));
    CHECK(b == doctest::Approx(-1.0));
    auto [gf, bf] = admittance_of(l, true);
    CHECK(gf == doctest::Approx(0.0));
    CHECK(bf == doctest::Approx(-2.0));
}

TEST_CASE("admittance matches the complex reciprocal oracle") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        Line l;
        l.id = "l";
        l.resistance = rng.uniform(0.0, 0.2);
        l.reactance = rng.uniform(1e-3, 0.5);
        l.reduced_reactance = l.reactance * rng.uniform(0.2, 1.0);
        for (bool facts : {false, true}) {
            auto [g, b] = admittance_of(l, facts);
            const std::complex<double> z(l.resistance,
                                         facts ? l.reduced_reactance : l.reactance);
            const std::complex<double> y = 1.0 / z;
            CHECK(std::abs(g - y.real()) <= 1e-12 * std::abs(y));
            CHECK(std::abs(b - y.imag()) <= 1e-12 * std::abs(y));
            // (G + iB)(R + iZ) == 1
            const std::complex<double> prod = std::complex<double>(g, b) * z;
            CHECK(std::abs(prod - 1.0) <= 1e-12);
        }
    }
    Line degenerate;
    degenerate.id = "d";
    degenerate.resistance = 0.0;
    degenerate.reactance = 0.0;
    degenerate.reduced_reactance = 0.0;
    CHECK_THROWS_AS(admittance_of(degenerate, false), NetworkError);
}

TEST_CASE("apply_load_scale") {
    Network net = parse_network(kTwoBus);
    Network same = apply_load_scale(net, 1.0);
    CHECK(serialize_network(same) == serialize_network(net));

    Network up = apply_load_scale(net, 1.25);
    CHECK(up.bus("b2").demand_p == doctest::Approx(125.0));
    CHECK(up.bus("b2").demand_q == doctest::Approx(37.5));

    Rng rng(99);
    for (int i = 0; i < 20; ++i) {
        Network r = random_network(rng);
        const double scale = rng.uniform(0.5, 1.5);
        Network scaled = apply_load_scale(r, scale);
        CHECK(scaled.total_demand_p() ==
              doctest::Approx(scale * r.total_demand_p()).epsilon(1e-12));
        CHECK(scaled.total_demand_q() ==
              doctest::Approx(scale * r.total_demand_q()).epsilon(1e-12));
        CHECK(scaled.buses.size() == r.buses.size());
        CHECK(scaled.lines.size() == r.lines.size());
        // Non-demand fields bit-exact.
        for (size_t k = 0; k < r.lines.size(); ++k) {
            CHECK(scaled.lines[k].reactance == r.lines[k].reactance);
            CHECK(scaled.lines[k].cost_build == r.lines[k].cost_build);
        }
        for (size_t k = 0; k < r.buses.size(); ++k) {
            CHECK(scaled.buses[k].v_min == r.buses[k].v_min);
            CHECK(scaled.buses[k].existing_gen_p_max == r.buses[k].existing_gen_p_max);
        }
    }
    CHECK_THROWS_AS(apply_load_scale(net, 0.0), NetworkError);
}
