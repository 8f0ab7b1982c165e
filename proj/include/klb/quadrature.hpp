#pragma once

// Adaptive Gauss-Kronrod 15(7) quadrature on a finite interval.
// Globally adaptive: the interval with the largest error estimate is
// bisected until the total estimate meets the tolerance.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace klb::quad {

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    int max_intervals = 4000;
};

namespace detail {

// 15-point Kronrod abscissae/weights with the embedded 7-point Gauss rule.
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
void gk15(const F& f, double a, double b, double& integral, double& error) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    fv[7] = f(c);
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kXgk[i];
        fv[i] = f(c - dx);
        fv[14 - i] = f(c + dx);
    }
    double resk = kWgk[7] * fv[7];
    double resg = kWg[3] * fv[7];
    for (int i = 0; i < 7; ++i) {
        resk += kWgk[i] * (fv[i] + fv[14 - i]);
        if (i % 2 == 1) resg += kWg[i / 2] * (fv[i] + fv[14 - i]);
    }
    integral = resk * h;
    const double diff = std::abs(resk - resg) * h;
    // QUADPACK-style sharpened estimate; plain |K-G| is already conservative
    // for the smooth integrands used here.
    error = diff;
}

struct Segment {
    double a, b, integral, error;
};

}  // namespace detail

template <class F>
double integrate(F&& f, double a, double b, const Options& opt = {},
                 const char* what = "integrand") {
    if (!(a < b)) {
        if (a == b) return 0.0;
        throw QuadratureError(std::string("integrate: empty interval for ") + what);
    }
    std::vector<detail::Segment> segs;
    segs.reserve(64);
    detail::Segment s0{a, b, 0.0, 0.0};
    detail::gk15(f, a, b, s0.integral, s0.error);
    segs.push_back(s0);
    double total = s0.integral;
    double err = s0.error;
    while (err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
        if (static_cast<int>(segs.size()) >= opt.max_intervals)
            throw QuadratureError(std::string("integrate: no convergence for ") + what +
                                  " after " + std::to_string(segs.size()) +
                                  " subdivisions (error " + std::to_string(err) + ")");
        auto worst = std::max_element(
            segs.begin(), segs.end(),
            [](const detail::Segment& x, const detail::Segment& y) { return x.error < y.error; });
        detail::Segment left{worst->a, 0.5 * (worst->a + worst->b), 0.0, 0.0};
        detail::Segment right{left.b, worst->b, 0.0, 0.0};
        detail::gk15(f, left.a, left.b, left.integral, left.error);
        detail::gk15(f, right.a, right.b, right.integral, right.error);
        total += left.integral + right.integral - worst->integral;
        err += left.error + right.error - worst->error;
        *worst = left;
        segs.push_back(right);
    }
    // Re-sum for accuracy; the incremental total accumulates roundoff.
    total = 0.0;
    for (const auto& s : segs) total += s.integral;
    return total;
}

}  // namespace klb::quad
