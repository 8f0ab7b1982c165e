#pragma once

// Scalar special functions used by every kernel in the library:
// the modified Bessel function K0, the Bessel function J0, and the
// normalized Gaussian smearing weight.  All functions are pure and
// thread-safe.

namespace klb::specfun {

// Accuracy contract for the evaluations below.  rel_tol drives the
// convergence of the internal expansions; abs_tol is the level below
// which a result is allowed to flush to zero.
struct AccuracyTarget {
    double rel_tol = 1e-12;
    double abs_tol = 1e-300;
};

// Modified Bessel function of the second kind, K0(z), z > 0.
// Strictly positive and strictly decreasing.  For z large enough that
// K0 underflows the result is exactly 0 (not an error).
// Throws std::domain_error for z <= 0.
double bessel_k0(double z, const AccuracyTarget& target = {});

// Bessel function of the first kind, J0(z), z >= 0.  |J0(z)| <= 1.
// Throws std::domain_error for z < 0.
double bessel_j0(double z, const AccuracyTarget& target = {});

// Normalized Gaussian in s centered at mu2 with width sigma (both in
// mass^2 units): exp(-(mu2-s)^2 / (2 sigma^2)) / (sqrt(2 pi) sigma).
// Throws std::domain_error for sigma <= 0.
double gaussian_weight(double mu2, double s, double sigma);

}  // namespace klb::specfun
