#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "klb/lpcore.hpp"
#include "oracles.hpp"

using namespace klb::lpcore;

TEST_CASE("one-variable examples") {
    LinearProgram lp;
    lp.objective = {1.0};
    lp.sense = Sense::MAX;
    lp.rows.push_back({{1.0}, Relation::LE, 1.0});
    const auto r = solve(lp);
    REQUIRE(r.status == SolveStatus::OPTIMAL);
    CHECK(r.objective_value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.solution[0] == doctest::Approx(1.0).epsilon(1e-12));

    LinearProgram bad;
    bad.objective = {0.0};
    bad.rows.push_back({{1.0}, Relation::GE, 2.0});
    bad.rows.push_back({{1.0}, Relation::LE, 1.0});
    CHECK(solve(bad).status == SolveStatus::INFEASIBLE);

    LinearProgram ray;
    ray.objective = {1.0};
    ray.sense = Sense::MAX;
    ray.rows.push_back({{1.0}, Relation::GE, 0.5});
    CHECK(solve(ray).status == SolveStatus::UNBOUNDED);
}

TEST_CASE("check_feasible examples") {
    LinearProgram lp;
    lp.objective = {0.0};
    lp.rows.push_back({{1.0}, Relation::EQ, 1.0});
    const auto f = check_feasible(lp);
    CHECK(f.feasible);
    CHECK(f.point[0] == doctest::Approx(1.0));

    // x1 + x2 = 1, x1 >= 2: deficit of exactly one unit
    LinearProgram lp2;
    lp2.objective = {0.0, 0.0};
    lp2.rows.push_back({{1.0, 1.0}, Relation::EQ, 1.0});
    lp2.rows.push_back({{1.0, 0.0}, Relation::GE, 2.0});
    const auto f2 = check_feasible(lp2);
    CHECK_FALSE(f2.feasible);
    CHECK(f2.infeasibility_measure >= 1.0 - 1e-9);
}

TEST_CASE("solver matches brute-force vertex enumeration on random instances") {
    std::mt19937 rng(20240817);
    int optimal = 0, infeasible = 0, unbounded = 0;
    for (int trial = 0; trial < 150; ++trial) {
        const LinearProgram lp = oracle::random_lp(rng);
        const auto want = oracle::enumerate_lp(lp);
        const auto got = solve(lp);
        CAPTURE(trial);
        REQUIRE(got.status == want.status);
        switch (want.status) {
            case SolveStatus::OPTIMAL:
                ++optimal;
                CHECK(std::abs(got.objective_value - want.objective) < 1e-8);
                break;
            case SolveStatus::INFEASIBLE: ++infeasible; break;
            case SolveStatus::UNBOUNDED: ++unbounded; break;
        }
    }
    // the generator must actually exercise all three verdicts
    CHECK(optimal > 30);
    CHECK(infeasible > 10);
    CHECK(unbounded > 10);
}

TEST_CASE("identical inputs produce identical results") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const LinearProgram lp = oracle::random_lp(rng);
        const auto a = solve(lp);
        const auto b = solve(lp);
        REQUIRE(a.status == b.status);
        CHECK(a.objective_value == b.objective_value);  // bitwise
        CHECK(a.iterations == b.iterations);
        REQUIRE(a.solution.size() == b.solution.size());
        for (std::size_t i = 0; i < a.solution.size(); ++i) CHECK(a.solution[i] == b.solution[i]);
    }
}

TEST_CASE("scaling the objective scales the optimum and keeps the vertex") {
    LinearProgram lp;
    lp.objective = {3.0, 1.0};
    lp.sense = Sense::MAX;
    lp.rows.push_back({{1.0, 1.0}, Relation::LE, 4.0});
    lp.rows.push_back({{1.0, 0.0}, Relation::LE, 3.0});
    const auto base = solve(lp);
    REQUIRE(base.status == SolveStatus::OPTIMAL);
    for (double lambda : {2.0, 7.31, 450.0}) {
        LinearProgram scaled = lp;
        for (auto& c : scaled.objective) c *= lambda;
        const auto r = solve(scaled);
        REQUIRE(r.status == SolveStatus::OPTIMAL);
        CHECK(r.objective_value ==
              doctest::Approx(lambda * base.objective_value).epsilon(1e-12));
        for (std::size_t i = 0; i < r.solution.size(); ++i)
            CHECK(r.solution[i] == doctest::Approx(base.solution[i]).epsilon(1e-12));
    }
}

TEST_CASE("adding a row never turns an infeasible program feasible") {
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> coef(-5, 5);
    int checked = 0;
    for (int trial = 0; trial < 200 && checked < 25; ++trial) {
        LinearProgram lp = oracle::random_lp(rng);
        if (check_feasible(lp).feasible) continue;
        ++checked;
        Row extra;
        extra.coeffs.resize(lp.num_vars());
        for (auto& a : extra.coeffs) a = coef(rng);
        extra.rel = Relation::LE;
        extra.rhs = coef(rng);
        lp.rows.push_back(std::move(extra));
        CHECK_FALSE(check_feasible(lp).feasible);
    }
    CHECK(checked >= 10);
}

TEST_CASE("iteration cap raises instead of returning silently") {
    LinearProgram lp;
    lp.objective = {1.0, 1.0, 1.0};
    lp.sense = Sense::MAX;
    lp.rows.push_back({{1.0, 1.0, 0.0}, Relation::LE, 3.0});
    lp.rows.push_back({{0.0, 1.0, 1.0}, Relation::LE, 3.0});
    lp.rows.push_back({{1.0, 0.0, 1.0}, Relation::LE, 3.0});
    SolverOptions opt;
    opt.max_iterations = 1;
    CHECK_THROWS_AS(solve(lp, opt), SolverError);
}

TEST_CASE("malformed programs are rejected") {
    LinearProgram lp;
    CHECK_THROWS_AS(lp.validate(), std::invalid_argument);
    lp.objective = {1.0};
    lp.rows.push_back({{1.0, 2.0}, Relation::LE, 1.0});  // length mismatch
    CHECK_THROWS_AS(solve(lp), std::invalid_argument);
    lp.rows[0].coeffs = {std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_AS(solve(lp), std::invalid_argument);
}

TEST_CASE("debug dump uses the fixed self-describing layout") {
    LinearProgram lp;
    lp.objective = {1.0, -0.5};
    lp.sense = Sense::MIN;
    lp.rows.push_back({{2.0, 1.0}, Relation::LE, 3.0});
    lp.rows.push_back({{1.0, 0.0}, Relation::EQ, 1.0});
    lp.rows.push_back({{0.0, 1.0}, Relation::GE, 0.25});
    const std::string path = "lpcore_dump_test.txt";
    dump(lp, path);
    std::ifstream in(path);
    std::string l1, l2, l3, l4;
    std::getline(in, l1);
    std::getline(in, l2);
    std::getline(in, l3);
    std::getline(in, l4);
    CHECK(l1 == "min 1 -0.5");
    CHECK(l2 == "2 1 <= 3");
    CHECK(l3 == "1 0 = 1");
    CHECK(l4 == "0 1 >= 0.25");
    std::remove(path.c_str());
}
