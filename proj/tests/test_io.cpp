#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "klb/inversion.hpp"
#include "klb/io.hpp"
#include "testmodels.hpp"

using namespace klb;
using namespace klb::io;

namespace {

namespace fs = std::filesystem;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name)
        : path((fs::temp_directory_path() / name).string()) {}
    ~TempFile() {
        std::remove(path.c_str());
        std::remove((path + ".meta.json").c_str());
    }
};

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("doubles render with 17 significant digits and re-read exactly") {
    CHECK(format_double(1.5) == "1.5");
    CHECK(format_double(0.1) == "0.10000000000000001");
    std::mt19937_64 rng(17);
    for (int i = 0; i < 2000; ++i) {
        const double v = std::ldexp(static_cast<double>(rng()) / 1e4,
                                    static_cast<int>(rng() % 80) - 40);
        CHECK(parse_double(format_double(v), "test") == v);
    }
    CHECK_THROWS_AS(parse_double("1.0x", "test"), ParseError);
    CHECK_THROWS_AS(parse_double("", "test"), ParseError);
}

TEST_CASE("correlator CSV reads the documented two-line example") {
    TempFile tmp("klb_corr_example.csv");
    spit(tmp.path, "x,C\n1.0,0.067008909\n");
    const auto corr = read_correlator_csv(tmp.path);
    REQUIRE(corr.size() == 1);
    CHECK(corr.points[0] == 1.0);
    CHECK(corr.values[0] == 0.067008909);
    CHECK(corr.slack == 0.0);
}

TEST_CASE("correlator CSV rejects bad input with line context") {
    TempFile tmp("klb_corr_bad.csv");
    spit(tmp.path, "x,C\n1.0,0.5\n0.5,0.6\n");
    CHECK_THROWS_WITH_AS(read_correlator_csv(tmp.path),
                         doctest::Contains(":3"), ParseError);
    spit(tmp.path, "x,C\n1.0,nan\n");
    CHECK_THROWS_AS(read_correlator_csv(tmp.path), ParseError);
    spit(tmp.path, "h1,h2\n1.0,0.5\n");
    CHECK_THROWS_AS(read_correlator_csv(tmp.path), ParseError);
    spit(tmp.path, "x,C\n");
    CHECK_THROWS_AS(read_correlator_csv(tmp.path), ParseError);
}

TEST_CASE("correlator CSV round-trips 1000 random sets exactly") {
    std::mt19937 rng(23);
    std::uniform_int_distribution<int> len(1, 8);
    std::uniform_real_distribution<double> step(1e-6, 2.0);
    std::uniform_real_distribution<double> val(-2.0, 2.0);
    TempFile tmp("klb_corr_roundtrip.csv");
    for (int trial = 0; trial < 1000; ++trial) {
        spectral::CorrelatorSet corr;
        double x = 0.0;
        const int n = len(rng);
        for (int i = 0; i < n; ++i) {
            x += step(rng);
            corr.points.push_back(x);
            corr.values.push_back(val(rng));
        }
        write_correlator_csv(corr, tmp.path);
        const auto back = read_correlator_csv(tmp.path);
        REQUIRE(back.size() == corr.size());
        for (std::size_t i = 0; i < corr.size(); ++i) {
            CHECK(back.points[i] == corr.points[i]);  // bitwise
            CHECK(back.values[i] == corr.values[i]);
        }
    }
}

TEST_CASE("empty bounds table writes a header-only CSV") {
    TempFile tmp("klb_bounds_empty.csv");
    inversion::BoundsTable t;
    write_bounds_csv(t, tmp.path);
    CHECK(slurp(tmp.path) == "parameter,lower,upper,lower_status,upper_status\n");
}

TEST_CASE("one-row bounds table matches the golden bytes and round-trips") {
    inversion::BoundsTable t;
    t.rows.push_back(
        {1.5, 0.25, 0.75, lpcore::SolveStatus::OPTIMAL, lpcore::SolveStatus::OPTIMAL});
    t.slack = 1e-5;
    t.n_c = 3;
    t.n_v = 100;
    t.s_min = 0.006;
    t.s_max = 60.0;
    t.objective = "window";
    TempFile tmp("klb_bounds_onerow.csv");
    write_bounds_csv(t, tmp.path);

    const std::string golden_dir = std::string(KLB_TEST_SOURCE_DIR) + "/golden";
    CHECK(slurp(tmp.path) == slurp(golden_dir + "/bounds_onerow.csv"));
    CHECK(slurp(tmp.path + ".meta.json") == slurp(golden_dir + "/bounds_onerow.csv.meta.json"));

    const auto back = read_bounds_csv(tmp.path);
    REQUIRE(back.rows.size() == 1);
    CHECK(back.rows[0].parameter == 1.5);
    CHECK(back.rows[0].lower == 0.25);
    CHECK(back.rows[0].upper == 0.75);
    CHECK(back.rows[0].lower_status == lpcore::SolveStatus::OPTIMAL);
    CHECK(back.slack == 1e-5);
    CHECK(back.n_c == 3);
    CHECK(back.n_v == 100);
    CHECK(back.objective == "window");
}

TEST_CASE("model document round-trips and rejects unknown keys") {
    TempFile tmp("klb_model.json");
    const auto model = testmodels::reference_model();
    write_model_json(model, tmp.path);
    const auto back = read_model_json(tmp.path);
    CHECK(back.pole_weight() == model.pole_weight());
    CHECK(back.pole_mass2() == model.pole_mass2());
    CHECK(back.threshold() == model.threshold());
    REQUIRE(back.continuum().size() == model.continuum().size());
    for (std::size_t i = 0; i < model.continuum().size(); ++i) {
        CHECK(back.continuum()[i].s == model.continuum()[i].s);
        CHECK(back.continuum()[i].rho == model.continuum()[i].rho);
    }
    CHECK(back.normalized());

    spit(tmp.path, R"({"pole_weight": 1.0, "pole_mass2": 1.0, "threshold": 4.0,
                       "continuum": [], "pole_mass": 2.0})");
    CHECK_THROWS_WITH_AS(read_model_json(tmp.path), doctest::Contains("pole_mass"), ParseError);
    spit(tmp.path, R"({"pole_weight": 1.0})");
    CHECK_THROWS_WITH_AS(read_model_json(tmp.path), doctest::Contains("pole_mass2"), ParseError);
}

TEST_CASE("empty config document yields all defaults") {
    TempFile tmp("klb_config_empty.json");
    spit(tmp.path, "{}");
    const RunConfig cfg = load_config(tmp.path);
    CHECK(cfg.grid.s_min == 0.0);
    CHECK(cfg.grid.s_max == 60.0);
    CHECK(cfg.grid.n_v == 10000);
    CHECK(cfg.x_window.x_lo == 1e-5);
    CHECK(cfg.x_window.x_hi == 3.0);
    CHECK(cfg.x_window.n_c == 100);
    CHECK(cfg.objective.sigma2 == 0.01);
    CHECK(cfg.bisection.slack_hi == 1e-2);
    CHECK(cfg.bisection.slack_rel_tol == 1e-2);
    CHECK(cfg.bisection.mass_lo == 0.1);
    CHECK(cfg.bisection.mass_hi == 1.5);
    CHECK(cfg.bisection.mass_step == 0.01);
    CHECK(cfg.bisection.mass_resolution == 1e-4);
    CHECK(cfg.bisection.max_iterations == 60);
    CHECK(cfg.solver.feas_tol == 1e-9);
    CHECK(cfg.solver.opt_tol == 1e-9);
    CHECK(cfg.slack == 0.0);
    CHECK(cfg.out_dir == ".");
}

TEST_CASE("config n_v override drives the assembled column count") {
    TempFile tmp("klb_config_nv.json");
    spit(tmp.path, R"({"grid": {"n_v": 20000}})");
    const RunConfig cfg = load_config(tmp.path);
    CHECK(cfg.grid.n_v == 20000);
    const auto grid = spectral::SpectralGrid::uniform(cfg.grid.s_min, cfg.grid.s_max, cfg.grid.n_v);
    spectral::CorrelatorSet corr;
    corr.points = {1.0};
    corr.values = {0.05};
    corr.slack = 0.01;
    const auto lp = inversion::build_bound_problem(corr, grid, inversion::Window{0.0, 1.0},
                                                   lpcore::Sense::MAX);
    CHECK(lp.num_vars() == 20000);
}

TEST_CASE("unknown config keys are named, all problems reported at once") {
    TempFile tmp("klb_config_bad.json");
    spit(tmp.path, R"({"N_w": 3, "grid": {"n_v": "many"}, "slack": -1.0})");
    try {
        load_config(tmp.path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("N_w") != std::string::npos);
        CHECK(msg.find("grid.n_v") != std::string::npos);
        CHECK(msg.find("slack") != std::string::npos);
    }
}

TEST_CASE("range syntax lo:hi:count") {
    const auto r = parse_range("0:20:5");
    REQUIRE(r.size() == 5);
    CHECK(r.front() == 0.0);
    CHECK(r.back() == 20.0);
    CHECK(r[2] == 10.0);
    CHECK(parse_range("1.5").size() == 1);
    CHECK(parse_range("3:7:1") == std::vector<double>{3.0});
    CHECK_THROWS_AS(parse_range("1:2"), ParseError);
    CHECK_THROWS_AS(parse_range("1:2:0"), ParseError);
    CHECK_THROWS_AS(parse_range("1:2:2.5"), ParseError);
}

TEST_CASE("result documents carry the advertised keys") {
    TempFile gap_tmp("klb_gap.json");
    bootstrap::GapResult r;
    r.m_opt = 1.001;
    r.z_opt = 0.899;
    r.slack_min = 2e-6;
    r.sqrt_s1 = 0.9995;
    r.sqrt_s2 = 1.0025;
    r.diagnostics = {12, 345, 0.88, 0.91, true};
    write_gap_result(r, 9.0, gap_tmp.path);
    const std::string doc = slurp(gap_tmp.path);
    for (const char* key : {"m_opt", "z_opt", "delta_c_min", "sqrt_s1", "sqrt_s2",
                            "threshold_factor", "outer_iterations", "feasibility_solves",
                            "collapsed", "version"})
        CHECK(doc.find(key) != std::string::npos);

    TempFile ms_tmp("klb_minslack.json");
    write_min_slack_result(3.5e-6, 100, 10000, ms_tmp.path);
    const std::string ms = slurp(ms_tmp.path);
    for (const char* key : {"delta_c_min", "n_c", "n_v", "version"})
        CHECK(ms.find(key) != std::string::npos);
}
