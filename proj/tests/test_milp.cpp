#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "resgrid/milp/model.hpp"
#include "resgrid/rng.hpp"
#include "support/soc_oracle.hpp"

using namespace resgrid;
using namespace resgrid::testutil;

TEST_CASE("maximize a bounded integer") {
    MilpModel m;
    VarRef x = m.add_var("x", 0, 3, VarKind::Integer);
    LinExpr obj;
    obj.add(x, 1.0);
    m.set_objective(obj, /*minimize=*/false);
    auto res = solve_milp(m);
    REQUIRE(res.optimal());
    CHECK(res.value(x) == doctest::Approx(3.0));
    CHECK(res.objective == doctest::Approx(3.0));
}

TEST_CASE("infeasible box via rows") {
    MilpModel m;
    VarRef x = m.add_var("x", 0, 10);
    LinExpr a, b;
    a.add(x, 1.0);
    m.add_row(a, Sense::GreaterEq, 2.0);
    b.add(x, 1.0);
    m.add_row(b, Sense::LessEq, 1.0);
    m.set_objective(LinExpr{});
    auto res = solve_milp(m);
    CHECK(res.status == SolveStatus::Infeasible);
}

TEST_CASE("plain LP with equalities") {
    // min -x - 2y  st  x + y = 1, x - y <= 0.2, x,y in [0,1]
    MilpModel m;
    VarRef x = m.add_var("x", 0, 1);
    VarRef y = m.add_var("y", 0, 1);
    m.add_row(LinExpr{}.add(x, 1.0).add(y, 1.0), Sense::Equal, 1.0);
    m.add_row(LinExpr{}.add(x, 1.0).add(y, -1.0), Sense::LessEq, 0.2);
    LinExpr obj;
    obj.add(x, -1.0).add(y, -2.0);
    m.set_objective(obj);
    auto res = solve_milp(m);
    REQUIRE(res.optimal());
    CHECK(res.objective == doctest::Approx(-2.0));
    CHECK(res.value(x) == doctest::Approx(0.0));
    CHECK(res.value(y) == doctest::Approx(1.0));
}

TEST_CASE("knapsacks agree with exhaustive enumeration") {
    Rng rng(404);
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 10;
        std::vector<double> w(n), v(n);
        for (int i = 0; i < n; ++i) {
            w[i] = rng.uniform(1, 10);
            v[i] = rng.uniform(1, 20);
        }
        const double cap = rng.uniform(10, 30);

        MilpModel m;
        std::vector<VarRef> xs;
        LinExpr wsum, obj;
        for (int i = 0; i < n; ++i) {
            xs.push_back(m.add_var("x" + std::to_string(i), 0, 1, VarKind::Binary));
            wsum.add(xs.back(), w[i]);
            obj.add(xs.back(), v[i]);
        }
        m.add_row(wsum, Sense::LessEq, cap);
        m.set_objective(obj, /*minimize=*/false);
        MilpOptions opt;
        opt.rel_gap = 1e-9;
        auto res = solve_milp(m, opt);
        REQUIRE(res.optimal());

        double best = 0.0;
        for (int mask = 0; mask < (1 << n); ++mask) {
            double tw = 0, tv = 0;
            for (int i = 0; i < n; ++i)
                if (mask & (1 << i)) {
                    tw += w[i];
                    tv += v[i];
                }
            if (tw <= cap) best = std::max(best, tv);
        }
        CHECK(res.objective == doctest::Approx(best).epsilon(1e-9));
        for (const auto& x : xs) {
            const double xv = res.value(x);
            CHECK(std::abs(xv - std::round(xv)) <= 1e-7);
        }
    }
}

TEST_CASE("solve_milp refuses atoms; degenerate cut loop matches it") {
    MilpModel m;
    VarRef x = m.add_var("x", 0, 2);
    m.set_objective(LinExpr{}.add(x, 1.0));
    auto direct = solve_milp(m);
    auto cuts = solve_with_cuts(m);
    REQUIRE(direct.optimal());
    REQUIRE(cuts.optimal());
    CHECK(cuts.objective == doctest::Approx(direct.objective));
    CHECK(cuts.cut_rounds == 1);
    CHECK(cuts.cuts_added == 0);

    VarRef y = m.add_var("y", 0, 1);
    VarRef z = m.add_var("z", 0, 1);
    m.add_atom(SocAtom{{x.id}, y.id, z.id, ""});
    CHECK_THROWS(solve_milp(m));
}

TEST_CASE("AM-GM instance solves to 2 within 1e-4") {
    MilpModel m;
    VarRef x = m.add_var("x", 1, 1);
    VarRef y = m.add_var("y", 0, 10);
    VarRef z = m.add_var("z", 0, 10);
    m.add_atom(SocAtom{{x.id}, y.id, z.id, "cone"});
    LinExpr obj;
    obj.add(y, 1.0).add(z, 1.0);
    m.set_objective(obj);
    auto res = solve_with_cuts(m);
    REQUIRE(res.optimal());
    CHECK(std::abs(res.objective - 2.0) <= 1e-4);
    CHECK(res.value(y) == doctest::Approx(1.0).epsilon(2e-2));
    CHECK(res.value(z) == doctest::Approx(1.0).epsilon(2e-2));
}

TEST_CASE("gradient cut at (1,1) with z=0 is 2x - y <= z and cuts the point off") {
    MilpModel m;
    VarRef x = m.add_var("x", -5, 5);
    VarRef y = m.add_var("y", 0, 5);
    VarRef z = m.add_var("z", 0, 5);
    SocAtom atom{{x.id}, y.id, z.id, ""};
    std::vector<double> point = {1.0, 1.0, 0.0};
    auto cut = gradient_cut(atom, point, 1e-6);
    // Expect 2x - y - z <= 0.
    double cxx = 0, cyy = 0, czz = 0;
    for (auto [id, c] : cut.coef) {
        if (id == x.id) cxx = c;
        if (id == y.id) cyy = c;
        if (id == z.id) czz = c;
    }
    CHECK(cxx == doctest::Approx(2.0));
    CHECK(cyy == doctest::Approx(-1.0));
    CHECK(czz == doctest::Approx(-1.0));
    CHECK(cut.rhs == doctest::Approx(0.0));
    // Violated at the point:
    CHECK(2 * point[0] - point[1] - point[2] > 0.5);
}

TEST_CASE("gradient cuts are valid across the cone") {
    Rng rng(505);
    SocAtom atom{{0, 1}, 2, 3, ""};
    std::vector<LinearConstraint> cuts;
    for (int i = 0; i < 60; ++i) {
        std::vector<double> pt = {rng.uniform(-2, 2), rng.uniform(-2, 2),
                                  rng.uniform(0, 3), rng.uniform(0, 3)};
        cuts.push_back(gradient_cut(atom, pt, 1e-6));
    }
    int checked = 0;
    for (int i = 0; i < 100000; ++i) {
        double x0 = rng.uniform(-2, 2), x1 = rng.uniform(-2, 2);
        double y = rng.uniform(0, 3), z = rng.uniform(0, 3);
        if (x0 * x0 + x1 * x1 > y * z) continue;  // outside the cone
        ++checked;
        const double vals[4] = {x0, x1, y, z};
        for (const auto& c : cuts) {
            double lhs = 0;
            for (auto [id, co] : c.coef) lhs += co * vals[id];
            CHECK(lhs <= c.rhs + 1e-7);
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("cut loop bound is monotone and meets the grid oracle") {
    Rng rng(606);
    for (int trial = 0; trial < 6; ++trial) {
        const size_t k = 1 + rng.below(2);
        SocProgram p;
        for (size_t i = 0; i < k; ++i) {
            p.cx.push_back(rng.uniform(-1, 1));
            const double l = rng.uniform(-2, 0.5);
            p.xlb.push_back(l);
            p.xub.push_back(l + rng.uniform(0.5, 2.5));
        }
        p.cy = rng.uniform(0, 1);
        p.cz = rng.uniform(0, 1);
        p.yub = rng.uniform(0.5, 3);
        p.zub = rng.uniform(0.5, 3);

        MilpModel m;
        SocAtom atom;
        LinExpr obj;
        for (size_t i = 0; i < k; ++i) {
            VarRef xv = m.add_var("x" + std::to_string(i), p.xlb[i], p.xub[i]);
            atom.x.push_back(xv.id);
            obj.add(xv, p.cx[i]);
        }
        VarRef y = m.add_var("y", p.ylb, p.yub);
        VarRef z = m.add_var("z", p.zlb, p.zub);
        atom.y = y.id;
        atom.z = z.id;
        m.add_atom(atom);
        obj.add(y, p.cy).add(z, p.cz);
        m.set_objective(obj);

        // Manual rounds to observe the monotone lower bound.
        MilpOptions opt;
        double prev = -std::numeric_limits<double>::infinity();
        SolveResult res;
        for (int round = 0; round < 200; ++round) {
            res = default_backend().solve(m, opt);
            REQUIRE(res.optimal());
            CHECK(res.objective >= prev - 1e-7);
            prev = res.objective;
            double xx = 0.0;
            for (int xi : atom.x) xx += res.values[size_t(xi)] * res.values[size_t(xi)];
            const double yz = res.values[size_t(atom.y)] * res.values[size_t(atom.z)];
            if (xx <= yz + 1e-6 * std::max(1.0, std::abs(yz))) break;
            m.add_row(gradient_cut(atom, res.values, opt.y_floor));
        }
        const double oracle = soc_grid_oracle(p);
        const double tol = std::max(1e-4, 1e-3 * std::abs(oracle));
        CHECK(std::abs(res.objective - oracle) <= tol);
    }
}

TEST_CASE("cut loop cap yields limit status with a bound") {
    MilpModel m;
    VarRef x = m.add_var("x", 1, 1);
    VarRef y = m.add_var("y", 0, 10);
    VarRef z = m.add_var("z", 0, 10);
    m.add_atom(SocAtom{{x.id}, y.id, z.id, ""});
    LinExpr obj;
    obj.add(y, 1.0).add(z, 1.0);
    m.set_objective(obj);
    MilpOptions opt;
    opt.max_cut_rounds = 2;
    auto res = solve_with_cuts(m, opt);
    CHECK(res.status == SolveStatus::Limit);
    CHECK(std::isfinite(res.objective));
}

TEST_CASE("deterministic re-solve") {
    Rng rng(707);
    MilpModel m;
    LinExpr obj;
    std::vector<VarRef> xs;
    for (int i = 0; i < 12; ++i) {
        xs.push_back(m.add_var("b" + std::to_string(i), 0, 1, VarKind::Binary));
        obj.add(xs.back(), rng.uniform(-5, 5));
    }
    for (int r = 0; r < 6; ++r) {
        LinExpr row;
        for (int i = 0; i < 12; ++i) row.add(xs[size_t(i)], rng.uniform(-1, 1));
        m.add_row(row, Sense::LessEq, rng.uniform(0.5, 2));
    }
    m.set_objective(obj);
    auto a = solve_milp(m);
    auto b = solve_milp(m);
    REQUIRE(a.optimal());
    REQUIRE(b.optimal());
    CHECK(a.objective == b.objective);
    CHECK(a.values == b.values);
}

TEST_CASE("objective floor row tightens and updates") {
    MilpModel m;
    VarRef x = m.add_var("x", 0, 5);
    m.set_objective(LinExpr{}.add(x, 2.0));
    m.set_objective_floor(4.0);
    auto res = solve_milp(m);
    REQUIRE(res.optimal());
    CHECK(res.objective == doctest::Approx(4.0));
    m.set_objective_floor(6.0);
    res = solve_milp(m);
    REQUIRE(res.optimal());
    CHECK(res.objective == doctest::Approx(6.0));
    CHECK(m.num_rows() == 1);
}

TEST_CASE("lp dump mentions rows and integrality") {
    MilpModel m;
    VarRef x = m.add_var("x", 0, 1, VarKind::Binary);
    m.add_row(LinExpr{}.add(x, 1.0), Sense::LessEq, 1.0, "cap");
    m.set_objective(LinExpr{}.add(x, 1.0));
    const std::string dump = m.dump_lp();
    CHECK(dump.find("min:") != std::string::npos);
    CHECK(dump.find("cap") != std::string::npos);
    CHECK(dump.find("bin") != std::string::npos);
}
