#pragma once

// File formats and configuration: correlator CSV, bounds CSV with a JSON
// metadata sidecar, spectral-model / result JSON documents, and the run
// configuration.  All serialization is locale-independent and
// byte-deterministic; every number round-trips to the identical double.

#include <stdexcept>
#include <string>
#include <vector>

#include "klb/bootstrap.hpp"
#include "klb/inversion.hpp"
#include "klb/spectral.hpp"

namespace klb::io {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 17-significant-digit rendering (round-trip exact) and strict parsing.
std::string format_double(double v);
double parse_double(const std::string& text, const std::string& context);

// ---------------------------------------------------------------------------
// Correlator CSV: header "x,C", one record per line, x strictly increasing
// and positive.  The parsed set carries slack = 0.
spectral::CorrelatorSet read_correlator_csv(const std::string& path);
void write_correlator_csv(const spectral::CorrelatorSet& corr, const std::string& path);

// ---------------------------------------------------------------------------
// Bounds CSV: header "parameter,lower,upper,lower_status,upper_status".
// write_bounds_csv also writes a metadata sidecar at path + ".meta.json"
// (slack, n_c, n_v, grid range, objective kind, tool version).
void write_bounds_csv(const inversion::BoundsTable& table, const std::string& path);
inversion::BoundsTable read_bounds_csv(const std::string& path);

// ---------------------------------------------------------------------------
// Spectral model document: JSON with keys pole_weight, pole_mass2,
// threshold, continuum (array of [s, rho] pairs) and optional
// normalized flag.
spectral::SpectralModel read_model_json(const std::string& path);
void write_model_json(const spectral::SpectralModel& model, const std::string& path);

// ---------------------------------------------------------------------------
// Result documents.
void write_gap_result(const bootstrap::GapResult& result, double threshold_factor,
                      const std::string& path);
void write_min_slack_result(double slack_min, int n_c, int n_v, const std::string& path);

// ---------------------------------------------------------------------------
// Run configuration: JSON, nested sections, every key optional (defaults
// below), unknown keys are errors.  All problems are reported at once.
struct GridSpec {
    double s_min = 0.0;
    double s_max = 60.0;
    int n_v = 10000;
};

struct XWindowSpec {
    double x_lo = 1e-5;
    double x_hi = 3.0;
    int n_c = 100;  // logarithmic spacing
};

struct ObjectiveSpecConfig {
    double sigma2 = 0.01;               // Gaussian smearing width squared
    std::string mu2_range = "0:20:200";  // lo:hi:count
    std::string t_range = "0:200:100";
    double s_reg = -1.0;    // < 0: M^2/10 when mass2 is known, else 0 with a warning
    double window_a = 0.0;
    double window_b = -1.0;  // < 0: s_max + 1
    double mass2 = -1.0;     // pole mass^2 estimate; < 0: unknown
    double threshold_factor = 9.0;
};

struct BisectionSpecConfig {
    double slack_hi = 1e-2;
    double slack_rel_tol = 1e-2;
    double mass_lo = 0.1;
    double mass_hi = 1.5;
    double mass_step = 0.01;
    double mass_resolution = 1e-4;
    int max_iterations = 60;
};

struct SolverSpecConfig {
    double feas_tol = 1e-9;
    double opt_tol = 1e-9;
};

struct RunConfig {
    std::string input;  // correlator CSV path
    std::string model;  // spectral model JSON path
    std::string out_dir = ".";
    double slack = 0.0;
    int threads = 0;  // 0 = hardware concurrency
    GridSpec grid;
    XWindowSpec x_window;
    ObjectiveSpecConfig objective;
    BisectionSpecConfig bisection;
    SolverSpecConfig solver;
};

RunConfig load_config(const std::string& path);

// "lo:hi:count" -> count evenly spaced values (count >= 1); a bare number
// is a one-element list.
std::vector<double> parse_range(const std::string& spec);

}  // namespace klb::io
