#pragma once

// Feasibility-bisection drivers: the minimal consistent slack deltaC_min
// (an a-posteriori lower bound on the correlator's systematic error) and
// the mass-gap bootstrap over the pole + continuum parametrization.

#include <functional>
#include <stdexcept>

#include "klb/lpcore.hpp"
#include "klb/spectral.hpp"

namespace klb::bootstrap {

struct BisectionConfig {
    double slack_hi = 1e-2;        // starting slack, must be feasible
    double slack_rel_tol = 1e-2;   // relative bisection tolerance on the slack
    double mass_lo = 0.1;          // coarse mass scan range and step, units of m
    double mass_hi = 1.5;
    double mass_step = 0.01;
    double mass_resolution = 1e-4;  // edge refinement target, units of m
    int max_iterations = 60;
    lpcore::SolverOptions solver;
    int threads = 1;
    // Per-point slack weighting hook; only the constant model ships
    // (empty function == weight 1 for every x).
    std::function<double(double)> slack_profile;
};

struct MassInterval {
    bool empty = true;
    double sqrt_s1 = 0.0;  // lowest known-feasible mass
    double sqrt_s2 = 0.0;  // highest known-feasible mass
    double width() const { return empty ? 0.0 : sqrt_s2 - sqrt_s1; }
};

struct GapDiagnostics {
    int outer_iterations = 0;
    long feasibility_solves = 0;
    double z_lo = 0.0;  // bracket on Z from min/max-Z solves at m_opt
    double z_hi = 0.0;
    bool collapsed = false;  // final interval width <= 10 * mass_resolution
};

struct GapResult {
    double m_opt = 0.0;
    double z_opt = 0.0;      // Z at the feasibility vertex nearest m_opt
    double slack_min = 0.0;  // lower bound on the correlator error
    double sqrt_s1 = 0.0;
    double sqrt_s2 = 0.0;
    GapDiagnostics diagnostics;
};

// Raised when the coarse mass scan finds a disconnected feasible set;
// the message carries the full scan map.
struct NonContiguousFeasibleSet : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when the problem is already infeasible at cfg.slack_hi; the
// remedy is to raise the starting slack.
struct InfeasibleAtStart : lpcore::SolverError {
    using lpcore::SolverError::SolverError;
};

// Bisect the slack between the largest known-infeasible and smallest
// known-feasible values until the relative width drops below
// slack_rel_tol; returns the smallest feasible slack found.  The problem
// must be feasible at cfg.slack_hi (error otherwise); corr.slack is
// ignored in favor of the probed values.
double min_slack(const spectral::CorrelatorSet& corr, const spectral::SpectralGrid& grid,
                 const BisectionConfig& cfg = {});

// Fixed-mass feasibility: variables Z >= 0 and rho_j >= 0 on grid bins with
// s_j >= threshold_factor * M^2 (bins below threshold are dropped);
// normalization Z + sum Delta_j rho_j = 1; correlator rows within +-slack.
// Scans masses in [mass_lo, mass_hi] at mass_step, then refines both edges
// by bisection to mass_resolution.  threshold_factor is 4 (generic) or 9
// (Z2-symmetric).  An empty interval is a result, not an error.
MassInterval feasible_mass_interval(const spectral::CorrelatorSet& corr,
                                    const spectral::SpectralGrid& grid, double slack,
                                    double threshold_factor, const BisectionConfig& cfg = {});

// Outer bisection on the slack between "mass interval nonempty" and
// "mass interval empty"; at termination m_opt is the midpoint of the last
// nonempty interval and slack_min the smallest slack that kept it
// nonempty.  Warns (and still returns the midpoint) if the final interval
// has not collapsed to within 10 * mass_resolution.
GapResult bootstrap_gap(const spectral::CorrelatorSet& corr, const spectral::SpectralGrid& grid,
                        const BisectionConfig& cfg = {}, double threshold_factor = 9.0);

}  // namespace klb::bootstrap
