#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "klb/bootstrap.hpp"
#include "klb/inversion.hpp"
#include "testmodels.hpp"

using namespace klb;
using namespace klb::bootstrap;
using spectral::CorrelatorSet;
using spectral::SpectralGrid;

namespace {

// quadrature-synthesized reference data, cached per process
const CorrelatorSet& reference_corr() {
    static const CorrelatorSet corr = spectral::synth_correlator(
        testmodels::reference_model(), spectral::log_spaced(1e-4, 3.0, 40));
    return corr;
}

CorrelatorSet shifted(const CorrelatorSet& corr, double eps) {
    CorrelatorSet out = corr;
    for (double& v : out.values) v += eps;
    return out;
}

BisectionConfig fast_cfg() {
    BisectionConfig cfg;
    cfg.mass_lo = 0.7;
    cfg.mass_hi = 1.3;
    cfg.mass_step = 0.02;
    return cfg;
}

}  // namespace

TEST_CASE("min_slack on exact grid-supported data is zero") {
    std::mt19937 rng(61);
    const SpectralGrid model = testmodels::random_grid_model(rng, 0.0, 60.0, 800);
    const CorrelatorSet corr =
        testmodels::grid_correlator(model, spectral::log_spaced(1e-4, 3.0, 30));
    const double dc = min_slack(corr, model, {});
    CHECK(dc <= 1e-8);
}

TEST_CASE("min_slack under a constant injected shift never exceeds the shift") {
    std::mt19937 rng(62);
    const SpectralGrid model = testmodels::random_grid_model(rng, 0.0, 60.0, 800);
    const CorrelatorSet clean =
        testmodels::grid_correlator(model, spectral::log_spaced(1e-4, 3.0, 30));
    const double eps = 1e-5;
    const CorrelatorSet noisy = shifted(clean, eps);

    // the generating density reproduces the shifted data within exactly eps,
    // so eps is always an upper bound on the feasibility edge
    {
        CorrelatorSet probe = noisy;
        probe.slack = eps * (1.0 + 1e-12);
        const auto lp = inversion::build_bound_problem(probe, model,
                                                       inversion::Window{0.0, 1.0},
                                                       lpcore::Sense::MAX);
        CHECK(lpcore::check_feasible(lp).feasible);
    }

    // a smooth constant shift is almost entirely absorbable by a positive
    // density at this constraint count, so only the upper bound is asserted
    const double dc = min_slack(noisy, model, {});
    CHECK(dc >= 0.0);
    CHECK(dc <= eps * 1.01);
}

TEST_CASE("min_slack decreases under grid refinement for an off-grid pole") {
    const spectral::SpectralModel pole(1.0, 1.0037, 5.0, {}, true);
    const CorrelatorSet corr =
        spectral::synth_correlator(pole, spectral::log_spaced(1e-4, 3.0, 30));
    const SpectralGrid coarse = SpectralGrid::uniform(0.0, 30.0, 400);
    const SpectralGrid fine = SpectralGrid::uniform(0.0, 30.0, 800);
    const double dc_coarse = min_slack(corr, coarse, {});
    const double dc_fine = min_slack(corr, fine, {});
    CHECK(dc_coarse > 0.0);
    CHECK(dc_fine > 0.0);
    CHECK(dc_fine < dc_coarse);
}

TEST_CASE("min_slack demands a feasible starting slack") {
    std::mt19937 rng(63);
    const SpectralGrid model = testmodels::random_grid_model(rng, 0.0, 60.0, 400);
    const CorrelatorSet bad = shifted(
        testmodels::grid_correlator(model, spectral::log_spaced(1e-4, 3.0, 20)), 1.0);
    BisectionConfig cfg;
    cfg.slack_hi = 1e-4;
    CHECK_THROWS_AS(min_slack(bad, model, cfg), InfeasibleAtStart);
}

TEST_CASE("feasible_mass_interval contains the generating mass") {
    const SpectralGrid grid = SpectralGrid::uniform(0.0, 60.0, 1000);
    const auto interval = feasible_mass_interval(reference_corr(), grid, 1e-3, 9.0, fast_cfg());
    REQUIRE_FALSE(interval.empty);
    CHECK(interval.sqrt_s1 <= 1.0);
    CHECK(interval.sqrt_s2 >= 1.0);
}

TEST_CASE("vacuous slack makes every scanned mass feasible") {
    const SpectralGrid grid = SpectralGrid::uniform(0.0, 60.0, 600);
    const BisectionConfig cfg = fast_cfg();
    const auto interval = feasible_mass_interval(reference_corr(), grid, 10.0, 9.0, cfg);
    REQUIRE_FALSE(interval.empty);
    CHECK(interval.sqrt_s1 == cfg.mass_lo);
    CHECK(interval.sqrt_s2 == cfg.mass_hi);
}

TEST_CASE("slack below the minimum empties the interval") {
    const SpectralGrid grid = SpectralGrid::uniform(0.0, 60.0, 600);
    const auto noisy = shifted(reference_corr(), 1e-3);
    const auto interval = feasible_mass_interval(noisy, grid, 1e-5, 9.0, fast_cfg());
    CHECK(interval.empty);
}

TEST_CASE("mass intervals are nested in the slack") {
    const SpectralGrid grid = SpectralGrid::uniform(0.0, 60.0, 800);
    const auto wide = feasible_mass_interval(reference_corr(), grid, 1e-2, 9.0, fast_cfg());
    const auto tight = feasible_mass_interval(reference_corr(), grid, 1e-3, 9.0, fast_cfg());
    REQUIRE_FALSE(wide.empty);
    REQUIRE_FALSE(tight.empty);
    CHECK(tight.sqrt_s1 >= wide.sqrt_s1 - 1e-4);
    CHECK(tight.sqrt_s2 <= wide.sqrt_s2 + 1e-4);
}

TEST_CASE("threshold factor outside {4, 9} is rejected") {
    const SpectralGrid grid = SpectralGrid::uniform(0.0, 60.0, 100);
    CHECK_THROWS_AS(feasible_mass_interval(reference_corr(), grid, 1e-3, 5.0, fast_cfg()),
                    std::invalid_argument);
}

TEST_CASE("bootstrap_gap collapses onto the generating mass and pole weight") {
    const SpectralGrid grid = SpectralGrid::uniform(0.0, 60.0, 1000);
    BisectionConfig cfg = fast_cfg();
    cfg.slack_rel_tol = 0.25;
    const GapResult r = bootstrap_gap(reference_corr(), grid, cfg, 9.0);
    CHECK(r.m_opt == doctest::Approx(1.0).epsilon(0.02));
    CHECK(r.z_opt == doctest::Approx(0.9).epsilon(0.05));
    CHECK(r.slack_min > 0.0);
    CHECK(r.slack_min < 1e-3);
    CHECK(r.sqrt_s1 <= r.m_opt);
    CHECK(r.m_opt <= r.sqrt_s2);
    CHECK(r.diagnostics.z_lo <= r.z_opt + 1e-9);
    CHECK(r.z_opt <= r.diagnostics.z_hi + 1e-9);
    CHECK(r.diagnostics.feasibility_solves > 0);
}

TEST_CASE("bootstrap_gap demands a feasible starting slack") {
    const SpectralGrid grid = SpectralGrid::uniform(0.0, 60.0, 400);
    const auto noisy = shifted(reference_corr(), 1e-2);
    BisectionConfig cfg = fast_cfg();
    cfg.slack_hi = 1e-5;
    CHECK_THROWS_AS(bootstrap_gap(noisy, grid, cfg, 9.0), InfeasibleAtStart);
}
