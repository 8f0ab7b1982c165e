#include "klb/specfun.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace klb::specfun {

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kPi = 3.14159265358979323846;

// K0 for z < 2 from the ascending series
//   K0(z) = -(log(z/2) + gamma) I0(z) + sum_{k>=1} (z^2/4)^k / (k!)^2 * H_k.
// Cancellation between the two pieces stays mild on this range.
double k0_series(double z) {
    const double q = 0.25 * z * z;
    double term = 1.0;  // (q)^k / (k!)^2
    double i0 = 1.0;
    double hsum = 0.0;
    double h = 0.0;
    for (int k = 1; k < 60; ++k) {
        term *= q / (static_cast<double>(k) * k);
        h += 1.0 / k;
        i0 += term;
        hsum += term * h;
        if (term < 1e-18 * i0) break;
    }
    return -(std::log(0.5 * z) + kEulerGamma) * i0 + hsum;
}

// K0 for z >= 2 by Steed's continued fraction (CF2) for the scaled
// function: K0(z) = sqrt(pi/(2z)) e^{-z} / s with s from the recurrence.
double k0_cf2(double z, double rel_tol) {
    const double eps = std::max(1e-16, 0.01 * rel_tol);
    double b = 2.0 * (1.0 + z);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 2; i <= 20000; ++i) {
        a -= 2.0 * (i - 1);
        c = -a * c / i;
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < eps) {
            const double scale = std::exp(-z);
            if (scale == 0.0) return 0.0;  // hard underflow, by contract
            return std::sqrt(kPi / (2.0 * z)) * scale / s;
        }
    }
    throw std::runtime_error("bessel_k0: continued fraction failed to converge at z = " +
                             std::to_string(z));
}

// J0 power series, adequate (and free of damaging cancellation) for z < 9.
double j0_series(double z) {
    const double q = 0.25 * z * z;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 80; ++k) {
        term *= -q / (static_cast<double>(k) * k);
        sum += term;
        if (std::abs(term) < 1e-18) break;
    }
    return sum;
}

// J0 for z >= 9 by Miller's downward recurrence, normalized with
// J0 + 2 J2 + 2 J4 + ... = 1.
double j0_miller(double z) {
    int m = static_cast<int>(std::ceil(1.5 * z + 20.0));
    if (m % 2 == 1) ++m;
    double fnp1 = 0.0;
    double fn = 1e-30;
    double even_sum = fn;  // f_m, m even
    for (int nn = m; nn >= 1; --nn) {
        const double fnm1 = (2.0 * nn / z) * fn - fnp1;
        fnp1 = fn;
        fn = fnm1;
        if (((nn - 1) & 1) == 0 && nn - 1 > 0) even_sum += fn;
        if (std::abs(fn) > 1e250) {
            fn *= 1e-250;
            fnp1 *= 1e-250;
            even_sum *= 1e-250;
        }
    }
    return fn / (fn + 2.0 * even_sum);
}

}  // namespace

double bessel_k0(double z, const AccuracyTarget& target) {
    if (!(z > 0.0))
        throw std::domain_error("bessel_k0: argument must be positive, got " + std::to_string(z));
    if (z < 2.0) return k0_series(z);
    return k0_cf2(z, target.rel_tol);
}

double bessel_j0(double z, const AccuracyTarget&) {
    if (z < 0.0)
        throw std::domain_error("bessel_j0: argument must be nonnegative, got " +
                                std::to_string(z));
    if (z < 9.0) return j0_series(z);
    return j0_miller(z);
}

double gaussian_weight(double mu2, double s, double sigma) {
    if (!(sigma > 0.0))
        throw std::domain_error("gaussian_weight: sigma must be positive, got " +
                                std::to_string(sigma));
    const double u = (mu2 - s) / sigma;
    return kInvSqrt2Pi / sigma * std::exp(-0.5 * u * u);
}

}  // namespace klb::specfun
