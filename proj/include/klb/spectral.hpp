#pragma once

// Spectral-density domain types, the Euclidean kernel, Gaussian smearing,
// and the synthetic-correlator generator used for validation.
//
// Units: everything is expressed in units of the bare mass (m = 1);
// s and mu2 are mass^2, x is length = 1/mass, t is time = 1/mass.

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace klb::spectral {

struct ContinuumPoint {
    double s;    // mass^2
    double rho;  // 1/mass^2, >= 0
};

// Analytic ground truth: a single one-particle pole of weight pole_weight at
// pole_mass2, plus a piecewise-linear tabulated continuum starting at or
// above the multiparticle threshold.
class SpectralModel {
public:
    SpectralModel(double pole_weight, double pole_mass2, double threshold,
                  std::vector<ContinuumPoint> continuum, bool normalized = false);

    double pole_weight() const { return pole_weight_; }
    double pole_mass2() const { return pole_mass2_; }
    double threshold() const { return threshold_; }
    const std::vector<ContinuumPoint>& continuum() const { return continuum_; }
    bool normalized() const { return normalized_; }

    // Piecewise-linear interpolation of the tabulated continuum; 0 outside
    // the tabulated range.
    double continuum_density(double s) const;

    // Exact integral of the tabulated continuum (trapezoid = exact for the
    // piecewise-linear table).
    double continuum_mass() const;

    // Largest tabulated s (threshold when the table is empty).
    double s_max() const;

private:
    double pole_weight_;
    double pole_mass2_;
    double threshold_;
    std::vector<ContinuumPoint> continuum_;
    bool normalized_;
};

// Discretization of the spectral axis: the LP variable vector.
// nodes are strictly increasing; weights are the rectangle-rule spacings
// Delta_j = s_{j+1} - s_j with the last weight repeating its predecessor.
struct SpectralGrid {
    std::vector<double> nodes;    // s_j, mass^2
    std::vector<double> weights;  // Delta_j, mass^2
    std::vector<double> values;   // rho_j >= 0, 1/mass^2

    std::size_t size() const { return nodes.size(); }
    void validate() const;  // throws std::invalid_argument on violation

    // Equidistant grid with nodes s_min + j*Delta, j = 1..n_v,
    // Delta = (s_max - s_min)/n_v.  Starting one spacing above s_min keeps
    // every node strictly positive for s_min = 0, where the Euclidean
    // kernel diverges.  All values start at 0.
    static SpectralGrid uniform(double s_min, double s_max, int n_v);
};

// Finite correlator samples plus the tolerated per-point slack.
struct CorrelatorSet {
    std::vector<double> points;  // x_i > 0, strictly increasing
    std::vector<double> values;  // C_i
    double slack = 0.0;          // deltaC >= 0

    std::size_t size() const { return points.size(); }
    void validate() const;  // throws std::invalid_argument on violation
};

// Euclidean propagator of a free scalar of mass sqrt(s) in 1+1 dimensions:
// G_E(x; s) = K0(sqrt(s) |x|) / (2 pi).  Throws std::domain_error for
// x == 0 or s <= 0.
double euclid_propagator(double x, double s);

// Gaussian-smeared spectral density rho^sigma(mu2).  The pole contributes
// exactly; the continuum is integrated adaptively.
double smear(const SpectralModel& model, double mu2, double sigma);

// Grid version: sum_j Delta_j rho_j gaussian_weight(mu2, s_j, sigma).
double smear(const SpectralGrid& grid, double mu2, double sigma);

// Synthesize C(x) = Z * G_E(x; M^2) + int rho~(s) G_E(x; s) ds at the given
// points (all > 0), by adaptive quadrature to relative tolerance 1e-10.
// The returned set has slack = 0.
CorrelatorSet synth_correlator(const SpectralModel& model, const std::vector<double>& xs);

// Retarded propagator ground truth:
// G_R(t) = (1/2) [ Z J0(sqrt(M^2) t) + int rho~(s) J0(sqrt(s) t) ds ].
double retarded_true(const SpectralModel& model, double t);

// Window integral int_a^b rho(s) ds, the pole contributing iff a <= M^2 < b.
double window_true(const SpectralModel& model, double a, double b);

// Kernel matrix K(i, j) = euclid_propagator(x_i, s_j); the constraint block
// shared by every assembled linear program.
Eigen::MatrixXd kernel_matrix(const std::vector<double>& xs, const SpectralGrid& grid);

// n logarithmically spaced points in [lo, hi] (n >= 2; endpoints included).
std::vector<double> log_spaced(double lo, double hi, int n);

}  // namespace klb::spectral
