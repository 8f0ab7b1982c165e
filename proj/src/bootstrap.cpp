#include "klb/bootstrap.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>
#include <string>

#include "klb/specfun.hpp"

namespace klb::bootstrap {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

std::vector<double> slack_weights(const spectral::CorrelatorSet& corr,
                                  const BisectionConfig& cfg) {
    std::vector<double> w(corr.size(), 1.0);
    if (cfg.slack_profile)
        for (std::size_t i = 0; i < corr.size(); ++i) w[i] = cfg.slack_profile(corr.points[i]);
    return w;
}

// Grid-only feasibility problem (no pole variable); rhs mutates with the
// probed slack, the coefficient rows are assembled once.
struct SlackProbe {
    lpcore::LinearProgram lp;
    std::vector<double> values;
    std::vector<double> weights;
    long solves = 0;

    SlackProbe(const spectral::CorrelatorSet& corr, const spectral::SpectralGrid& grid,
               const BisectionConfig& cfg)
        : values(corr.values), weights(slack_weights(corr, cfg)) {
        corr.validate();
        grid.validate();
        const Eigen::MatrixXd kernel = spectral::kernel_matrix(corr.points, grid);
        const std::size_t n = grid.size();
        lp.sense = lpcore::Sense::MIN;
        lp.objective.assign(n, 0.0);
        lpcore::Row norm{grid.weights, lpcore::Relation::EQ, 1.0};
        lp.rows.push_back(std::move(norm));
        for (std::size_t i = 0; i < corr.size(); ++i) {
            std::vector<double> coeffs(n);
            for (std::size_t j = 0; j < n; ++j)
                coeffs[j] = grid.weights[j] *
                            kernel(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            lp.rows.push_back({coeffs, lpcore::Relation::GE, 0.0});
            lp.rows.push_back({std::move(coeffs), lpcore::Relation::LE, 0.0});
        }
    }

    bool feasible(double slack, double feas_tol) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            lp.rows[1 + 2 * i].rhs = values[i] - slack * weights[i];
            lp.rows[2 + 2 * i].rhs = values[i] + slack * weights[i];
        }
        ++solves;
        return lpcore::check_feasible(lp, feas_tol).feasible;
    }
};

// Fixed-mass feasibility problem: variables [Z, rho_j restricted to bins
// with s_j >= threshold_factor * M^2].
struct GapProbe {
    const spectral::CorrelatorSet& corr;
    const spectral::SpectralGrid& grid;
    Eigen::MatrixXd kernel;  // n_c x n_v, full grid
    std::vector<double> weights;
    double threshold_factor;
    long solves = 0;

    GapProbe(const spectral::CorrelatorSet& c, const spectral::SpectralGrid& g,
             double thr, const BisectionConfig& cfg)
        : corr(c), grid(g), weights(slack_weights(c, cfg)), threshold_factor(thr) {
        corr.validate();
        grid.validate();
        kernel = spectral::kernel_matrix(corr.points, grid);
    }

    struct Result {
        bool feasible;
        double z;
    };

    Result probe(double mass, double slack, double feas_tol) {
        const double m2 = mass * mass;
        const double s_cut = threshold_factor * m2;
        const auto first =
            std::lower_bound(grid.nodes.begin(), grid.nodes.end(), s_cut) - grid.nodes.begin();
        const std::size_t kept = grid.size() - static_cast<std::size_t>(first);
        const std::size_t n = 1 + kept;
        const std::size_t n_c = corr.size();

        lpcore::LinearProgram lp;
        lp.sense = lpcore::Sense::MIN;
        lp.objective.assign(n, 0.0);
        lp.rows.reserve(1 + 2 * n_c);
        std::vector<double> norm(n);
        norm[0] = 1.0;
        for (std::size_t j = 0; j < kept; ++j) norm[1 + j] = grid.weights[first + j];
        lp.rows.push_back({std::move(norm), lpcore::Relation::EQ, 1.0});
        for (std::size_t i = 0; i < n_c; ++i) {
            std::vector<double> coeffs(n);
            coeffs[0] = specfun::bessel_k0(mass * corr.points[i]) / kTwoPi;
            for (std::size_t j = 0; j < kept; ++j)
                coeffs[1 + j] = grid.weights[first + j] *
                                kernel(static_cast<Eigen::Index>(i),
                                       static_cast<Eigen::Index>(first + j));
            const double lo = corr.values[i] - slack * weights[i];
            const double hi = corr.values[i] + slack * weights[i];
            lp.rows.push_back({coeffs, lpcore::Relation::GE, lo});
            lp.rows.push_back({std::move(coeffs), lpcore::Relation::LE, hi});
        }
        ++solves;
        lpcore::Feasibility f = lpcore::check_feasible(lp, feas_tol);
        return {f.feasible, f.feasible ? f.point[0] : 0.0};
    }

    // Min/max of Z over the feasible set at (mass, slack).
    std::pair<lpcore::SolveResult, lpcore::SolveResult> z_bounds(double mass, double slack,
                                                                 const lpcore::SolverOptions& o) {
        const double m2 = mass * mass;
        const double s_cut = threshold_factor * m2;
        const auto first =
            std::lower_bound(grid.nodes.begin(), grid.nodes.end(), s_cut) - grid.nodes.begin();
        const std::size_t kept = grid.size() - static_cast<std::size_t>(first);
        const std::size_t n = 1 + kept;

        lpcore::LinearProgram lp;
        lp.sense = lpcore::Sense::MIN;
        lp.objective.assign(n, 0.0);
        lp.objective[0] = 1.0;
        std::vector<double> norm(n);
        norm[0] = 1.0;
        for (std::size_t j = 0; j < kept; ++j) norm[1 + j] = grid.weights[first + j];
        lp.rows.push_back({std::move(norm), lpcore::Relation::EQ, 1.0});
        for (std::size_t i = 0; i < corr.size(); ++i) {
            std::vector<double> coeffs(n);
            coeffs[0] = specfun::bessel_k0(mass * corr.points[i]) / kTwoPi;
            for (std::size_t j = 0; j < kept; ++j)
                coeffs[1 + j] = grid.weights[first + j] *
                                kernel(static_cast<Eigen::Index>(i),
                                       static_cast<Eigen::Index>(first + j));
            lp.rows.push_back({coeffs, lpcore::Relation::GE, corr.values[i] - slack * weights[i]});
            lp.rows.push_back(
                {std::move(coeffs), lpcore::Relation::LE, corr.values[i] + slack * weights[i]});
        }
        solves += 2;
        lpcore::SolveResult zlo = lpcore::solve(lp, o);
        lp.sense = lpcore::Sense::MAX;
        lpcore::SolveResult zhi = lpcore::solve(lp, o);
        return {zlo, zhi};
    }
};

struct Component {
    MassInterval interval;
    double z_mid = 0.0;  // Z at the feasible probe nearest the midpoint
    double m_mid = 0.0;
};

// Coarse scan of one window plus bisection refinement of both edges;
// returns every contiguous feasible component found.
std::vector<Component> scan_components(GapProbe& probe, double slack, double lo, double hi,
                                       double step, double resolution, double feas_tol) {
    std::vector<Component> out;
    const int cells = std::max(1, static_cast<int>(std::round((hi - lo) / step)));
    std::vector<double> masses(cells + 1);
    for (int k = 0; k <= cells; ++k) masses[k] = lo + (hi - lo) * k / cells;

    std::vector<char> feas(masses.size(), 0);
    std::vector<double> zs(masses.size(), 0.0);
    for (std::size_t k = 0; k < masses.size(); ++k) {
        auto r = probe.probe(masses[k], slack, feas_tol);
        feas[k] = r.feasible ? 1 : 0;
        zs[k] = r.z;
    }

    std::size_t k = 0;
    while (k < masses.size()) {
        if (!feas[k]) {
            ++k;
            continue;
        }
        std::size_t first = k;
        while (k + 1 < masses.size() && feas[k + 1]) ++k;
        const std::size_t last = k;
        ++k;

        Component comp;
        double left = masses[first];
        if (first > 0) {
            double bad = masses[first - 1];
            while (left - bad > resolution) {
                const double mid = 0.5 * (left + bad);
                if (probe.probe(mid, slack, feas_tol).feasible)
                    left = mid;
                else
                    bad = mid;
            }
        }
        double right = masses[last];
        if (last + 1 < masses.size()) {
            double bad = masses[last + 1];
            while (bad - right > resolution) {
                const double mid = 0.5 * (right + bad);
                if (probe.probe(mid, slack, feas_tol).feasible)
                    right = mid;
                else
                    bad = mid;
            }
        }
        comp.interval.empty = false;
        comp.interval.sqrt_s1 = left;
        comp.interval.sqrt_s2 = right;
        const double center = 0.5 * (left + right);
        std::size_t best = first;
        for (std::size_t i = first; i <= last; ++i)
            if (std::abs(masses[i] - center) < std::abs(masses[best] - center)) best = i;
        comp.z_mid = zs[best];
        comp.m_mid = masses[best];
        out.push_back(comp);
    }
    return out;
}

std::string component_map(const std::vector<Component>& comps) {
    std::ostringstream os;
    for (const auto& c : comps)
        os << " [" << c.interval.sqrt_s1 << ", " << c.interval.sqrt_s2 << "]";
    return os.str();
}

}  // namespace

double min_slack(const spectral::CorrelatorSet& corr, const spectral::SpectralGrid& grid,
                 const BisectionConfig& cfg) {
    SlackProbe probe(corr, grid, cfg);
    const double feas_tol = cfg.solver.feas_tol;
    double hi = cfg.slack_hi;
    if (!probe.feasible(hi, feas_tol))
        throw InfeasibleAtStart(
            "min_slack: problem infeasible at the starting slack " + std::to_string(hi) +
            "; raise slack_hi");
    if (probe.feasible(0.0, feas_tol)) return 0.0;
    double lo = 0.0;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        if (hi - lo <= cfg.slack_rel_tol * hi) return hi;
        const double mid = 0.5 * (lo + hi);
        if (probe.feasible(mid, feas_tol))
            hi = mid;
        else
            lo = mid;
    }
    std::ostringstream msg;
    msg << "min_slack: iteration cap " << cfg.max_iterations
        << " reached; feasibility edge bracketed in [" << lo << ", " << hi << "]";
    throw lpcore::SolverError(msg.str());
}

MassInterval feasible_mass_interval(const spectral::CorrelatorSet& corr,
                                    const spectral::SpectralGrid& grid, double slack,
                                    double threshold_factor, const BisectionConfig& cfg) {
    if (threshold_factor != 4.0 && threshold_factor != 9.0)
        throw std::invalid_argument("feasible_mass_interval: threshold_factor must be 4 or 9");
    if (!(cfg.mass_lo < cfg.mass_hi))
        throw std::invalid_argument("feasible_mass_interval: mass scan range is empty");
    GapProbe probe(corr, grid, threshold_factor, cfg);
    const auto comps = scan_components(probe, slack, cfg.mass_lo, cfg.mass_hi, cfg.mass_step,
                                       cfg.mass_resolution, cfg.solver.feas_tol);
    if (comps.empty()) return {};
    if (comps.size() > 1)
        throw NonContiguousFeasibleSet("feasible mass set is not contiguous at slack " +
                                       std::to_string(slack) + ":" + component_map(comps));
    return comps.front().interval;
}

GapResult bootstrap_gap(const spectral::CorrelatorSet& corr, const spectral::SpectralGrid& grid,
                        const BisectionConfig& cfg, double threshold_factor) {
    if (threshold_factor != 4.0 && threshold_factor != 9.0)
        throw std::invalid_argument("bootstrap_gap: threshold_factor must be 4 or 9");
    GapProbe probe(corr, grid, threshold_factor, cfg);
    const double feas_tol = cfg.solver.feas_tol;

    std::vector<Component> comps =
        scan_components(probe, cfg.slack_hi, cfg.mass_lo, cfg.mass_hi, cfg.mass_step,
                        cfg.mass_resolution, feas_tol);
    if (comps.empty())
        throw InfeasibleAtStart("bootstrap_gap: no feasible mass at the starting slack " +
                                std::to_string(cfg.slack_hi) + "; raise slack_hi");

    // Outer bisection between "some component feasible" and "none".  Every
    // component is followed; spurious ones die off as the slack shrinks, and
    // a set that stays disconnected to the end is reported, never resolved
    // by silently picking one part.
    double lo = 0.0;
    double hi = cfg.slack_hi;
    int outer = 0;
    bool warned = comps.size() > 1;
    if (warned)
        std::cerr << "warning: feasible mass set disconnected at slack " << cfg.slack_hi << ":"
                  << component_map(comps) << "; tracking all components\n";
    while (hi - lo > cfg.slack_rel_tol * hi) {
        if (outer >= cfg.max_iterations) {
            std::ostringstream msg;
            msg << "bootstrap_gap: iteration cap " << cfg.max_iterations
                << " reached; slack edge bracketed in [" << lo << ", " << hi << "]";
            throw lpcore::SolverError(msg.str());
        }
        ++outer;
        const double mid = 0.5 * (lo + hi);
        // Nested intervals: at a smaller slack each component lives inside a
        // current one; scan each padded component window at a step resolving
        // its width.
        std::vector<Component> next;
        for (const auto& comp : comps) {
            const double pad = cfg.mass_step;
            const double scan_lo = std::max(cfg.mass_lo, comp.interval.sqrt_s1 - pad);
            const double scan_hi = std::min(cfg.mass_hi, comp.interval.sqrt_s2 + pad);
            const double step =
                std::clamp(comp.interval.width() / 8.0, cfg.mass_resolution, cfg.mass_step);
            const auto found = scan_components(probe, mid, scan_lo, scan_hi, step,
                                               cfg.mass_resolution, feas_tol);
            next.insert(next.end(), found.begin(), found.end());
        }
        if (!next.empty()) {
            hi = mid;
            comps = std::move(next);
            if (!warned && comps.size() > 1) {
                warned = true;
                std::cerr << "warning: feasible mass set disconnected at slack " << mid << ":"
                          << component_map(comps) << "; tracking all components\n";
            }
        } else {
            lo = mid;
        }
    }
    if (comps.size() > 1)
        throw NonContiguousFeasibleSet(
            "bootstrap_gap: feasible mass set is still disconnected at the final slack " +
            std::to_string(hi) + ":" + component_map(comps));
    const Component best = comps.front();

    GapResult result;
    result.slack_min = hi;
    result.sqrt_s1 = best.interval.sqrt_s1;
    result.sqrt_s2 = best.interval.sqrt_s2;
    result.m_opt = 0.5 * (best.interval.sqrt_s1 + best.interval.sqrt_s2);
    result.diagnostics.outer_iterations = outer;
    result.diagnostics.collapsed = best.interval.width() <= 10.0 * cfg.mass_resolution;
    if (!result.diagnostics.collapsed)
        std::cerr << "warning: bootstrap_gap interval did not collapse (width "
                  << best.interval.width() << "); reporting the midpoint\n";

    auto at_opt = probe.probe(result.m_opt, result.slack_min, feas_tol);
    result.z_opt = at_opt.feasible ? at_opt.z : best.z_mid;
    // The bracket on Z is a diagnostic; the collapsed slack leaves only a
    // sliver of feasible densities, so pad it slightly.  The bracket can
    // only widen, which is the conservative direction.
    result.diagnostics.z_lo = result.z_opt;
    result.diagnostics.z_hi = result.z_opt;
    try {
        auto [zlo, zhi] = probe.z_bounds(result.m_opt, 1.001 * result.slack_min, cfg.solver);
        if (zlo.status == lpcore::SolveStatus::OPTIMAL)
            result.diagnostics.z_lo = zlo.objective_value;
        if (zhi.status == lpcore::SolveStatus::OPTIMAL)
            result.diagnostics.z_hi = zhi.objective_value;
    } catch (const lpcore::SolverError&) {
        // keep the point estimate
    }
    result.diagnostics.feasibility_solves = probe.solves;
    return result;
}

}  // namespace klb::bootstrap
