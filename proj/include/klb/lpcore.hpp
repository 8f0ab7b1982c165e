#pragma once

// Standard-form linear programs over nonnegative variables and a dense
// two-phase revised-simplex solver with infeasibility certification.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace klb::lpcore {

enum class Sense { MAX, MIN };
enum class Relation { LE, EQ, GE };
enum class SolveStatus { OPTIMAL, INFEASIBLE, UNBOUNDED };

const char* to_string(SolveStatus s);

struct Row {
    std::vector<double> coeffs;
    Relation rel;
    double rhs;
};

// max/min c.x subject to the rows and x >= 0 (nonnegativity is structural).
struct LinearProgram {
    std::vector<double> objective;
    Sense sense = Sense::MAX;
    std::vector<Row> rows;

    std::size_t num_vars() const { return objective.size(); }
    void validate() const;  // sizes and finiteness; throws std::invalid_argument
};

struct SolveResult {
    SolveStatus status;
    double objective_value = 0.0;          // meaningful iff OPTIMAL
    std::vector<double> solution;          // meaningful iff OPTIMAL
    double infeasibility_measure = 0.0;    // phase-1 residual, iff INFEASIBLE
    long iterations = 0;                   // simplex pivots, both phases
};

struct Feasibility {
    bool feasible;
    double infeasibility_measure;  // phase-1 residual (0 when feasible)
    std::vector<double> point;     // a feasible point, iff feasible
};

// Raised on iteration-cap overruns and internal numerical failures;
// the solver never returns a silently wrong answer.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverOptions {
    double feas_tol = 1e-9;  // relative to 1 + ||b||_1
    double opt_tol = 1e-9;
    long max_iterations = 0;  // 0 -> 50 * (num_vars + rows)
    int refactor_every = 100;
    int bland_stall = 50;  // degenerate pivots before Bland's-rule fallback
};

// Two-phase revised simplex.  Phase 1 minimizes total artificial mass; if
// its optimum exceeds feas_tol * (1 + ||b||_1) the program is INFEASIBLE
// with that optimum reported as infeasibility_measure.  Phase 2 uses
// Dantzig pricing with a Bland's-rule fallback after a stall of degenerate
// pivots.  UNBOUNDED when an entering column has no blocking ratio.
SolveResult solve(const LinearProgram& lp, const SolverOptions& opt = {});
SolveResult solve(const LinearProgram& lp, double feas_tol, double opt_tol);

// Phase 1 only.
Feasibility check_feasible(const LinearProgram& lp, double feas_tol = 1e-9);

// Debug dump in a fixed self-describing layout: one objective line
// ("max|min" followed by the coefficients), then one line per row
// (coefficients, relation symbol, rhs).  Numbers carry 17 significant
// digits.
void dump(const LinearProgram& lp, const std::string& path);

}  // namespace klb::lpcore
