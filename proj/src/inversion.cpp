#include "klb/inversion.hpp"

#include <cmath>
#include <exception>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <thread>

#include "klb/specfun.hpp"

namespace klb::inversion {

namespace {

struct Validator {
    void operator()(const GaussianSmear& g) const {
        if (!(g.sigma > 0.0)) throw std::invalid_argument("objective: sigma must be > 0");
    }
    void operator()(const Retarded& r) const {
        if (r.t < 0.0) throw std::invalid_argument("objective: t must be >= 0");
        if (r.s_reg < 0.0) throw std::invalid_argument("objective: s_reg must be >= 0");
    }
    void operator()(const Window& w) const {
        if (!(w.a < w.b)) throw std::invalid_argument("objective: window needs a < b");
    }
};

std::vector<double> objective_coeffs(const spectral::SpectralGrid& grid,
                                     const ObjectiveSpec& obj) {
    const std::size_t n = grid.size();
    std::vector<double> c(n, 0.0);
    std::visit(
        [&](const auto& o) {
            using T = std::decay_t<decltype(o)>;
            for (std::size_t j = 0; j < n; ++j) {
                const double s = grid.nodes[j];
                const double d = grid.weights[j];
                if constexpr (std::is_same_v<T, GaussianSmear>) {
                    c[j] = d * specfun::gaussian_weight(o.mu2, s, o.sigma);
                } else if constexpr (std::is_same_v<T, Retarded>) {
                    if (s > o.s_reg) c[j] = 0.5 * d * specfun::bessel_j0(std::sqrt(s) * o.t);
                } else {
                    if (s >= o.a && s < o.b) c[j] = d;
                }
            }
        },
        obj);
    return c;
}

}  // namespace

void validate(const ObjectiveSpec& obj) { std::visit(Validator{}, obj); }

std::string objective_kind(const ObjectiveSpec& obj) {
    if (std::holds_alternative<GaussianSmear>(obj)) return "gaussian_smear";
    if (std::holds_alternative<Retarded>(obj)) return "retarded";
    return "window";
}

ObjectiveSpec with_parameter(const ObjectiveSpec& family, double parameter) {
    ObjectiveSpec out = family;
    std::visit(
        [&](auto& o) {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, GaussianSmear>)
                o.mu2 = parameter;
            else if constexpr (std::is_same_v<T, Retarded>)
                o.t = parameter;
            else
                o.b = parameter;
        },
        out);
    return out;
}

lpcore::LinearProgram build_bound_problem(const spectral::CorrelatorSet& corr,
                                          const spectral::SpectralGrid& grid,
                                          const ObjectiveSpec& obj, lpcore::Sense sense) {
    corr.validate();
    grid.validate();
    validate(obj);
    const std::size_t n = grid.size();
    const std::size_t n_c = corr.size();
    const Eigen::MatrixXd kernel = spectral::kernel_matrix(corr.points, grid);

    // Tail adequacy: mass placed in the last bin must be invisible where the
    // kernel's decay in s is steepest (the largest x), otherwise the hard
    // truncation at s_max can bias the bounds.
    if (grid.weights.back() *
            kernel(static_cast<Eigen::Index>(n_c - 1), static_cast<Eigen::Index>(n - 1)) >
        1e-9)
        std::cerr << "warning: the last grid bin is still visible at x = " << corr.points.back()
                  << "; increase s_max\n";

    lpcore::LinearProgram lp;
    lp.sense = sense;
    lp.objective = objective_coeffs(grid, obj);
    lp.rows.reserve(1 + 2 * n_c);

    lpcore::Row norm;
    norm.coeffs = grid.weights;
    norm.rel = lpcore::Relation::EQ;
    norm.rhs = 1.0;
    lp.rows.push_back(std::move(norm));

    for (std::size_t i = 0; i < n_c; ++i) {
        std::vector<double> coeffs(n);
        for (std::size_t j = 0; j < n; ++j)
            coeffs[j] = grid.weights[j] * kernel(static_cast<Eigen::Index>(i),
                                                 static_cast<Eigen::Index>(j));
        lpcore::Row lo{coeffs, lpcore::Relation::GE, corr.values[i] - corr.slack};
        lpcore::Row hi{std::move(coeffs), lpcore::Relation::LE, corr.values[i] + corr.slack};
        lp.rows.push_back(std::move(lo));
        lp.rows.push_back(std::move(hi));
    }

    if (const auto* r = std::get_if<Retarded>(&obj)) {
        for (std::size_t j = 0; j < n; ++j) {
            if (grid.nodes[j] > r->s_reg) break;
            lpcore::Row zero;
            zero.coeffs.assign(n, 0.0);
            zero.coeffs[j] = 1.0;
            zero.rel = lpcore::Relation::EQ;
            zero.rhs = 0.0;
            lp.rows.push_back(std::move(zero));
        }
    }
    return lp;
}

BoundPair solve_bounds(const spectral::CorrelatorSet& corr, const spectral::SpectralGrid& grid,
                       const ObjectiveSpec& obj, const lpcore::SolverOptions& opt) {
    lpcore::LinearProgram lp = build_bound_problem(corr, grid, obj, lpcore::Sense::MIN);
    BoundPair out;
    out.lower = lpcore::solve(lp, opt);
    lp.sense = lpcore::Sense::MAX;
    out.upper = lpcore::solve(lp, opt);
    if (out.lower.status == lpcore::SolveStatus::OPTIMAL &&
        out.upper.status == lpcore::SolveStatus::OPTIMAL &&
        out.lower.objective_value > out.upper.objective_value + 2.0 * opt.opt_tol)
        throw lpcore::SolverError("solve_bounds: lower bound exceeds upper bound");
    return out;
}

namespace {

BoundsRow solve_one(lpcore::LinearProgram& lp, const spectral::SpectralGrid& grid,
                    const ObjectiveSpec& family, double parameter,
                    const lpcore::SolverOptions& opt) {
    lp.objective = objective_coeffs(grid, with_parameter(family, parameter));
    BoundsRow row;
    row.parameter = parameter;
    lp.sense = lpcore::Sense::MIN;
    lpcore::SolveResult lo = lpcore::solve(lp, opt);
    lp.sense = lpcore::Sense::MAX;
    lpcore::SolveResult hi = lpcore::solve(lp, opt);
    row.lower_status = lo.status;
    row.upper_status = hi.status;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.lower = lo.status == lpcore::SolveStatus::OPTIMAL ? lo.objective_value : nan;
    row.upper = hi.status == lpcore::SolveStatus::OPTIMAL ? hi.objective_value : nan;
    if (lo.status == lpcore::SolveStatus::OPTIMAL && hi.status == lpcore::SolveStatus::OPTIMAL &&
        row.lower > row.upper + 2.0 * opt.opt_tol)
        throw lpcore::SolverError("sweep: lower bound exceeds upper bound at parameter " +
                                  std::to_string(parameter));
    return row;
}

}  // namespace

BoundsTable sweep(const spectral::CorrelatorSet& corr, const spectral::SpectralGrid& grid,
                  const ObjectiveSpec& family, const std::vector<double>& parameters,
                  const lpcore::SolverOptions& opt, int threads) {
    if (parameters.empty()) throw std::invalid_argument("sweep: empty parameter list");
    BoundsTable table;
    table.rows.resize(parameters.size());
    table.slack = corr.slack;
    table.n_c = static_cast<int>(corr.size());
    table.n_v = static_cast<int>(grid.size());
    table.s_min = grid.nodes.front();
    table.s_max = grid.nodes.back();
    table.objective = objective_kind(family);

    lpcore::LinearProgram proto =
        build_bound_problem(corr, grid, with_parameter(family, parameters.front()),
                            lpcore::Sense::MIN);

    const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(parameters.size())));
    if (n_threads == 1) {
        for (std::size_t k = 0; k < parameters.size(); ++k)
            table.rows[k] = solve_one(proto, grid, family, parameters[k], opt);
        return table;
    }

    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n_threads);
    pool.reserve(n_threads);
    for (int w = 0; w < n_threads; ++w) {
        pool.emplace_back([&, w]() {
            try {
                lpcore::LinearProgram local = proto;  // rows shared by value per worker
                for (std::size_t k = w; k < parameters.size(); k += n_threads)
                    table.rows[k] = solve_one(local, grid, family, parameters[k], opt);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return table;
}

}  // namespace klb::inversion
