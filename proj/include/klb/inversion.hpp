#pragma once

// Assembly of the reduced inversion linear program from a correlator set
// and a spectral grid, under the three objective families, plus the
// min/max bound driver and parameter sweeps.

#include <string>
#include <variant>
#include <vector>

#include "klb/lpcore.hpp"
#include "klb/spectral.hpp"

namespace klb::inversion {

// Objective families.  sigma, s_reg, a, b are in mass^2 units; t is time.
struct GaussianSmear {
    double mu2;
    double sigma;
};
struct Retarded {
    double t;
    double s_reg;  // bins with s_j <= s_reg are pinned to zero
};
struct Window {
    double a;
    double b;  // half-open [a, b): adjacent windows partition exactly
};
using ObjectiveSpec = std::variant<GaussianSmear, Retarded, Window>;

void validate(const ObjectiveSpec& obj);  // throws std::invalid_argument
std::string objective_kind(const ObjectiveSpec& obj);

// Family parameter substitution for sweeps: mu2 for GaussianSmear, t for
// Retarded, the upper edge b for Window.
ObjectiveSpec with_parameter(const ObjectiveSpec& family, double parameter);

// Variables rho_j >= 0; one equality row sum_j Delta_j rho_j = 1; per
// correlator point the pair of rows sum_j Delta_j rho_j G_E(x_i; s_j)
// >= C_i - slack and <= C_i + slack; objective coefficients per family.
lpcore::LinearProgram build_bound_problem(const spectral::CorrelatorSet& corr,
                                          const spectral::SpectralGrid& grid,
                                          const ObjectiveSpec& obj, lpcore::Sense sense);

struct BoundPair {
    lpcore::SolveResult lower;
    lpcore::SolveResult upper;
};

// Solves MIN and MAX over the shared assembled constraint matrix.
BoundPair solve_bounds(const spectral::CorrelatorSet& corr, const spectral::SpectralGrid& grid,
                       const ObjectiveSpec& obj, const lpcore::SolverOptions& opt = {});

struct BoundsRow {
    double parameter;
    double lower = 0.0;
    double upper = 0.0;
    lpcore::SolveStatus lower_status;
    lpcore::SolveStatus upper_status;
};

struct BoundsTable {
    std::vector<BoundsRow> rows;
    // provenance of the sweep
    double slack = 0.0;
    int n_c = 0;
    int n_v = 0;
    double s_min = 0.0;
    double s_max = 0.0;
    std::string objective;
};

// One solve_bounds per parameter, rows in input order.  Individual
// infeasible rows are recorded, never fatal.  threads > 1 dispatches
// independent parameters concurrently; the merge order is deterministic.
BoundsTable sweep(const spectral::CorrelatorSet& corr, const spectral::SpectralGrid& grid,
                  const ObjectiveSpec& family, const std::vector<double>& parameters,
                  const lpcore::SolverOptions& opt = {}, int threads = 1);

}  // namespace klb::inversion
