#include "klb/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "klb/quadrature.hpp"
#include "klb/specfun.hpp"

namespace klb::spectral {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// Integrate f over one linear piece of the continuum table.
template <class F>
double piece_integral(const ContinuumPoint& a, const ContinuumPoint& b, const F& weight,
                      const quad::Options& opt, const char* what) {
    const double slope = (b.rho - a.rho) / (b.s - a.s);
    auto integrand = [&](double s) { return (a.rho + slope * (s - a.s)) * weight(s); };
    return quad::integrate(integrand, a.s, b.s, opt, what);
}

}  // namespace

SpectralModel::SpectralModel(double pole_weight, double pole_mass2, double threshold,
                             std::vector<ContinuumPoint> continuum, bool normalized)
    : pole_weight_(pole_weight),
      pole_mass2_(pole_mass2),
      threshold_(threshold),
      continuum_(std::move(continuum)),
      normalized_(normalized) {
    require(std::isfinite(pole_weight_) && pole_weight_ >= 0.0,
            "SpectralModel: pole_weight must be >= 0");
    require(std::isfinite(pole_mass2_) && pole_mass2_ > 0.0,
            "SpectralModel: pole_mass2 must be > 0");
    require(std::isfinite(threshold_) && threshold_ > pole_mass2_,
            "SpectralModel: threshold must exceed pole_mass2");
    for (std::size_t i = 0; i < continuum_.size(); ++i) {
        const auto& p = continuum_[i];
        require(std::isfinite(p.s) && std::isfinite(p.rho), "SpectralModel: non-finite continuum");
        require(p.rho >= 0.0, "SpectralModel: continuum density must be >= 0");
        require(p.s >= threshold_, "SpectralModel: continuum support starts below threshold");
        if (i > 0) require(p.s > continuum_[i - 1].s, "SpectralModel: continuum s not increasing");
    }
    if (normalized_) {
        const double total = pole_weight_ + continuum_mass();
        require(std::abs(total - 1.0) <= 1e-10,
                "SpectralModel: flagged normalized but total mass is " + std::to_string(total));
    }
}

double SpectralModel::continuum_density(double s) const {
    if (continuum_.size() < 2) return 0.0;
    if (s < continuum_.front().s || s > continuum_.back().s) return 0.0;
    auto it = std::upper_bound(continuum_.begin(), continuum_.end(), s,
                               [](double v, const ContinuumPoint& p) { return v < p.s; });
    if (it == continuum_.begin()) return continuum_.front().rho;
    if (it == continuum_.end()) return continuum_.back().rho;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double u = (s - lo.s) / (hi.s - lo.s);
    return lo.rho + u * (hi.rho - lo.rho);
}

double SpectralModel::continuum_mass() const {
    double total = 0.0;
    for (std::size_t i = 1; i < continuum_.size(); ++i)
        total += 0.5 * (continuum_[i].rho + continuum_[i - 1].rho) *
                 (continuum_[i].s - continuum_[i - 1].s);
    return total;
}

double SpectralModel::s_max() const {
    return continuum_.empty() ? threshold_ : continuum_.back().s;
}

void SpectralGrid::validate() const {
    require(nodes.size() >= 2, "SpectralGrid: at least two nodes required");
    require(weights.size() == nodes.size() && values.size() == nodes.size(),
            "SpectralGrid: nodes/weights/values size mismatch");
    const std::size_t n = nodes.size();
    for (std::size_t j = 0; j + 1 < n; ++j) {
        require(nodes[j + 1] > nodes[j], "SpectralGrid: nodes must be strictly increasing");
        const double d = nodes[j + 1] - nodes[j];
        require(std::abs(weights[j] - d) <= 1e-12 * (1.0 + d),
                "SpectralGrid: weight " + std::to_string(j) + " is not the node spacing");
    }
    require(std::abs(weights[n - 1] - weights[n - 2]) <= 1e-12 * (1.0 + weights[n - 2]),
            "SpectralGrid: last weight must repeat its predecessor");
    for (std::size_t j = 0; j < n; ++j) {
        require(weights[j] > 0.0, "SpectralGrid: weights must be positive");
        require(std::isfinite(values[j]) && values[j] >= 0.0,
                "SpectralGrid: values must be finite and >= 0");
    }
}

SpectralGrid SpectralGrid::uniform(double s_min, double s_max, int n_v) {
    require(n_v >= 2, "SpectralGrid::uniform: n_v must be >= 2");
    require(std::isfinite(s_min) && std::isfinite(s_max) && s_max > s_min,
            "SpectralGrid::uniform: need s_max > s_min");
    SpectralGrid g;
    g.nodes.resize(n_v);
    g.weights.assign(n_v, (s_max - s_min) / n_v);
    g.values.assign(n_v, 0.0);
    const double delta = (s_max - s_min) / n_v;
    for (int j = 0; j < n_v; ++j) g.nodes[j] = s_min + delta * (j + 1);
    return g;
}

void CorrelatorSet::validate() const {
    require(!points.empty(), "CorrelatorSet: at least one point required");
    require(points.size() == values.size(), "CorrelatorSet: points/values size mismatch");
    for (std::size_t i = 0; i < points.size(); ++i) {
        require(std::isfinite(points[i]) && points[i] > 0.0,
                "CorrelatorSet: points must be positive");
        require(std::isfinite(values[i]), "CorrelatorSet: values must be finite");
        if (i > 0)
            require(points[i] > points[i - 1], "CorrelatorSet: points must be strictly increasing");
    }
    require(std::isfinite(slack) && slack >= 0.0, "CorrelatorSet: slack must be >= 0");
}

double euclid_propagator(double x, double s) {
    if (x == 0.0) throw std::domain_error("euclid_propagator: kernel diverges at x = 0");
    if (!(s > 0.0))
        throw std::domain_error("euclid_propagator: s must be positive, got " + std::to_string(s));
    return specfun::bessel_k0(std::sqrt(s) * std::abs(x)) / kTwoPi;
}

double smear(const SpectralModel& model, double mu2, double sigma) {
    if (!(sigma > 0.0)) throw std::domain_error("smear: sigma must be positive");
    double result = model.pole_weight() * specfun::gaussian_weight(mu2, model.pole_mass2(), sigma);
    const auto& tab = model.continuum();
    quad::Options opt{1e-12, 1e-16, 2000};
    auto weight = [&](double s) { return specfun::gaussian_weight(mu2, s, sigma); };
    for (std::size_t i = 1; i < tab.size(); ++i) {
        // A piece more than 15 sigma away contributes below 1e-45 of the peak.
        if (tab[i].s < mu2 - 15.0 * sigma || tab[i - 1].s > mu2 + 15.0 * sigma) continue;
        result += piece_integral(tab[i - 1], tab[i], weight, opt, "smear");
    }
    return result;
}

double smear(const SpectralGrid& grid, double mu2, double sigma) {
    if (!(sigma > 0.0)) throw std::domain_error("smear: sigma must be positive");
    double result = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j)
        result +=
            grid.weights[j] * grid.values[j] * specfun::gaussian_weight(mu2, grid.nodes[j], sigma);
    return result;
}

CorrelatorSet synth_correlator(const SpectralModel& model, const std::vector<double>& xs) {
    require(!xs.empty(), "synth_correlator: no points given");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        require(xs[i] > 0.0, "synth_correlator: points must be positive");
        if (i > 0) require(xs[i] > xs[i - 1], "synth_correlator: points must be increasing");
    }
    CorrelatorSet out;
    out.points = xs;
    out.values.reserve(xs.size());
    out.slack = 0.0;
    const auto& tab = model.continuum();
    quad::Options opt{1e-10, 0.0, 20000};
    for (double x : xs) {
        double c = model.pole_weight() * euclid_propagator(x, model.pole_mass2());
        auto weight = [&](double s) { return euclid_propagator(x, s); };
        try {
            for (std::size_t i = 1; i < tab.size(); ++i)
                c += piece_integral(tab[i - 1], tab[i], weight, opt, "synth_correlator");
        } catch (const quad::QuadratureError& e) {
            throw quad::QuadratureError("synth_correlator failed at x = " + std::to_string(x) +
                                        ": " + e.what());
        }
        out.values.push_back(c);
    }
    return out;
}

double retarded_true(const SpectralModel& model, double t) {
    if (t < 0.0) throw std::domain_error("retarded_true: t must be >= 0");
    double value =
        model.pole_weight() * specfun::bessel_j0(std::sqrt(model.pole_mass2()) * t);
    const auto& tab = model.continuum();
    // The integrand oscillates in sqrt(s) t; absolute tolerance keeps the
    // subdivision finite when cancellation drives the integral near zero.
    quad::Options opt{1e-10, 1e-13, 50000};
    auto weight = [&](double s) { return specfun::bessel_j0(std::sqrt(s) * t); };
    for (std::size_t i = 1; i < tab.size(); ++i)
        value += piece_integral(tab[i - 1], tab[i], weight, opt, "retarded_true");
    return 0.5 * value;
}

double window_true(const SpectralModel& model, double a, double b) {
    if (!(a < b)) throw std::domain_error("window_true: need a < b");
    if (a < 0.0) throw std::domain_error("window_true: need a >= 0");
    double value = 0.0;
    if (a <= model.pole_mass2() && model.pole_mass2() < b) value += model.pole_weight();
    const auto& tab = model.continuum();
    for (std::size_t i = 1; i < tab.size(); ++i) {
        const double lo = std::max(a, tab[i - 1].s);
        const double hi = std::min(b, tab[i].s);
        if (lo >= hi) continue;
        value += 0.5 * (model.continuum_density(lo) + model.continuum_density(hi)) * (hi - lo);
    }
    return value;
}

Eigen::MatrixXd kernel_matrix(const std::vector<double>& xs, const SpectralGrid& grid) {
    const auto n_c = static_cast<Eigen::Index>(xs.size());
    const auto n_v = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd k(n_c, n_v);
    for (Eigen::Index j = 0; j < n_v; ++j) {
        const double root_s = std::sqrt(grid.nodes[j]);
        for (Eigen::Index i = 0; i < n_c; ++i)
            k(i, j) = specfun::bessel_k0(root_s * xs[i]) / kTwoPi;
    }
    return k;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
    require(n >= 2, "log_spaced: need n >= 2");
    require(lo > 0.0 && hi > lo, "log_spaced: need 0 < lo < hi");
    std::vector<double> xs(n);
    const double ratio = std::log(hi / lo);
    for (int i = 0; i < n; ++i) xs[i] = lo * std::exp(ratio * i / (n - 1));
    xs.front() = lo;
    xs.back() = hi;
    return xs;
}

}  // namespace klb::spectral
