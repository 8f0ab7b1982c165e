#include "klb/lpcore.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "klb/numformat.hpp"

namespace klb::lpcore {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::OPTIMAL: return "OPTIMAL";
        case SolveStatus::INFEASIBLE: return "INFEASIBLE";
        case SolveStatus::UNBOUNDED: return "UNBOUNDED";
    }
    return "UNKNOWN";
}

void LinearProgram::validate() const {
    if (objective.empty()) throw std::invalid_argument("LinearProgram: needs at least one variable");
    for (double c : objective)
        if (!std::isfinite(c)) throw std::invalid_argument("LinearProgram: non-finite objective");
    for (const Row& r : rows) {
        if (r.coeffs.size() != objective.size())
            throw std::invalid_argument("LinearProgram: row length mismatch");
        for (double a : r.coeffs)
            if (!std::isfinite(a)) throw std::invalid_argument("LinearProgram: non-finite row");
        if (!std::isfinite(r.rhs)) throw std::invalid_argument("LinearProgram: non-finite rhs");
    }
}

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kDegenStep = 1e-13;

// Internal: failures that a retry with more frequent refactorization can
// plausibly repair, as opposed to honest iteration-cap overruns.
struct NumericalTrouble : SolverError {
    using SolverError::SolverError;
};

enum class ColKind { Structural, Slack, Artificial };

// Dense revised simplex over the augmented column set
//   [structurals | slacks/surpluses | artificials],
// keeping an LU factorization of the basis plus product-form eta updates,
// refactorized every opt.refactor_every pivots.
class Simplex {
public:
    Simplex(const LinearProgram& lp, const SolverOptions& opt) : lp_(lp), opt_(opt) { build(); }

    // Phase 1 always runs; phase 2 only when want_phase2.
    SolveResult run(bool want_phase2);

private:
    void build();
    ColKind kind(int j) const {
        if (j < n_) return ColKind::Structural;
        if (j < n_ + n_slack_) return ColKind::Slack;
        return ColKind::Artificial;
    }
    void fetch_column(int j, Eigen::VectorXd& out) const {
        out.setZero(m_);
        if (j < n_) {
            out = A_.col(j);
        } else if (j < n_ + n_slack_) {
            out(slack_row_[j - n_]) = slack_sign_[j - n_];
        } else {
            out(art_row_[j - n_ - n_slack_]) = 1.0;
        }
    }

    void refactorize();
    void ftran(Eigen::VectorXd& v) const;  // v <- B^{-1} v
    void btran(Eigen::VectorXd& v) const;  // v <- B^{-T} v

    // Most negative reduced cost (Dantzig) or lowest eligible index (Bland).
    int price(const Eigen::VectorXd& y) const;
    // Ratio test; returns leaving position or -1 (no blocking ratio).
    // strict mode additionally rejects pivots that are tiny relative to the
    // column, which keeps the eta updates well conditioned.
    int ratio_test(const Eigen::VectorXd& w, double& step, bool strict) const;

    // Runs the current phase to optimality; returns false on UNBOUNDED.
    bool iterate();

    double phase1_objective() const;
    void set_phase(int phase);
    std::vector<double> structural_solution() const;
    void verify_optimal(const std::vector<double>& x) const;

    const LinearProgram& lp_;
    SolverOptions opt_;
    int m_ = 0, n_ = 0, n_slack_ = 0, n_art_ = 0, total_ = 0;
    Eigen::MatrixXd A_;  // m x n structural block, rhs-normalized, column-equilibrated
    Eigen::VectorXd col_scale_;  // x_original = col_scale_ .* x_scaled
    Eigen::VectorXd b_;  // normalized rhs, >= 0
    double bnorm1_ = 0.0;
    std::vector<Relation> rel_;
    std::vector<int> slack_row_, art_row_;
    std::vector<double> slack_sign_;
    std::vector<int> basis_;          // column id per basis position
    std::vector<int> position_;      // basis position per column, -1 if nonbasic
    Eigen::VectorXd xB_;
    Eigen::VectorXd cost_;  // current-phase costs over all columns (minimize)
    int phase_ = 1;
    long iterations_ = 0;
    long max_iterations_ = 0;
    int degen_streak_ = 0;
    bool bland_ = false;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    std::vector<std::pair<int, Eigen::VectorXd>> etas_;
    mutable Eigen::VectorXd scratch_;
};

void Simplex::build() {
    lp_.validate();
    m_ = static_cast<int>(lp_.rows.size());
    n_ = static_cast<int>(lp_.num_vars());
    A_.resize(m_, n_);
    b_.resize(m_);
    rel_.resize(m_);
    bnorm1_ = 0.0;
    for (int i = 0; i < m_; ++i) {
        const Row& r = lp_.rows[i];
        double sign = 1.0;
        Relation rl = r.rel;
        if (r.rhs < 0.0) {  // normalize to b >= 0
            sign = -1.0;
            if (rl == Relation::LE)
                rl = Relation::GE;
            else if (rl == Relation::GE)
                rl = Relation::LE;
        }
        for (int j = 0; j < n_; ++j) A_(i, j) = sign * r.coeffs[j];
        b_(i) = sign * r.rhs;
        rel_[i] = rl;
        bnorm1_ += std::abs(r.rhs);
    }
    // Column equilibration: unit-norm structural columns keep the basis
    // factorizations and the solution mass well scaled; results are mapped
    // back through col_scale_.
    col_scale_.resize(n_);
    for (int j = 0; j < n_; ++j) {
        const double norm = A_.col(j).cwiseAbs().maxCoeff();
        col_scale_(j) = norm > 0.0 ? 1.0 / norm : 1.0;
        A_.col(j) *= col_scale_(j);
    }
    for (int i = 0; i < m_; ++i) {
        if (rel_[i] != Relation::EQ) {
            slack_row_.push_back(i);
            slack_sign_.push_back(rel_[i] == Relation::LE ? 1.0 : -1.0);
        }
    }
    n_slack_ = static_cast<int>(slack_row_.size());
    for (int i = 0; i < m_; ++i)
        if (rel_[i] != Relation::LE) art_row_.push_back(i);
    n_art_ = static_cast<int>(art_row_.size());
    total_ = n_ + n_slack_ + n_art_;

    basis_.assign(m_, -1);
    position_.assign(total_, -1);
    for (int k = 0; k < n_slack_; ++k)
        if (slack_sign_[k] > 0.0) basis_[slack_row_[k]] = n_ + k;
    for (int k = 0; k < n_art_; ++k) basis_[art_row_[k]] = n_ + n_slack_ + k;
    for (int r = 0; r < m_; ++r) position_[basis_[r]] = r;
    xB_ = b_;

    max_iterations_ = opt_.max_iterations > 0
                          ? opt_.max_iterations
                          : 50L * (static_cast<long>(n_) + m_);
    set_phase(1);
    refactorize();
}

void Simplex::set_phase(int phase) {
    phase_ = phase;
    cost_.setZero(total_);
    if (phase == 1) {
        for (int k = 0; k < n_art_; ++k) cost_(n_ + n_slack_ + k) = 1.0;
    } else {
        const double s = lp_.sense == Sense::MAX ? -1.0 : 1.0;
        for (int j = 0; j < n_; ++j) cost_(j) = s * lp_.objective[j] * col_scale_(j);
    }
    degen_streak_ = 0;
    bland_ = false;
}

void Simplex::refactorize() {
    Eigen::MatrixXd basin(m_, m_);
    Eigen::VectorXd col(m_);
    for (int r = 0; r < m_; ++r) {
        fetch_column(basis_[r], col);
        basin.col(r) = col;
    }
    lu_.compute(basin);
    const auto& diag = lu_.matrixLU().diagonal();
    const double dmax = diag.cwiseAbs().maxCoeff();
    if (!(dmax > 0.0) || diag.cwiseAbs().minCoeff() < 1e-13 * dmax)
        throw NumericalTrouble("solve: basis matrix is numerically singular");
    etas_.clear();
    xB_ = lu_.solve(b_);
}

void Simplex::ftran(Eigen::VectorXd& v) const {
    v = lu_.solve(v);
    for (const auto& [r, w] : etas_) {
        const double t = v(r) / w(r);
        v.noalias() -= t * w;
        v(r) = t;
    }
}

void Simplex::btran(Eigen::VectorXd& v) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
        const int r = it->first;
        const Eigen::VectorXd& w = it->second;
        const double dot = w.dot(v);
        v(r) = (v(r) - dot + w(r) * v(r)) / w(r);
    }
    v = lu_.transpose().solve(v);
}

int Simplex::price(const Eigen::VectorXd& y) const {
    // The optimality gap left behind is bounded by ||x||_1 times the worst
    // admitted reduced cost, so the entering threshold adapts to the current
    // solution mass (and to the objective scale, for covariance).
    const double tol = opt_.opt_tol * std::max(1.0, cost_.cwiseAbs().maxCoeff()) /
                       std::max(1.0, xB_.cwiseAbs().sum());
    scratch_ = cost_.head(n_);
    scratch_.noalias() -= A_.transpose() * y;
    int best = -1;
    double best_d = -tol;
    auto consider = [&](int j, double d) {
        if (d >= -tol) return;
        if (bland_) {
            if (best < 0 || j < best) {
                best = j;
                best_d = d;
            }
        } else if (d < best_d) {
            best = j;
            best_d = d;
        }
    };
    for (int j = 0; j < n_; ++j)
        if (position_[j] < 0) consider(j, scratch_(j));
    for (int k = 0; k < n_slack_; ++k) {
        const int j = n_ + k;
        if (position_[j] < 0) consider(j, cost_(j) - slack_sign_[k] * y(slack_row_[k]));
    }
    // Artificials never re-enter.
    return best;
}

int Simplex::ratio_test(const Eigen::VectorXd& w, double& step, bool strict) const {
    // Harris-style two-pass test.  Pass 1 finds the most permissive step
    // that keeps every basic value above -delta; pass 2 picks the largest
    // pivot among rows whose exact ratio stays within that step, so the
    // infeasibility injected per pivot is bounded by delta.
    const double delta = 0.01 * opt_.feas_tol * (1.0 + bnorm1_);
    const double admit =
        strict ? std::max(kPivotTol, 1e-7 * w.cwiseAbs().maxCoeff()) : kPivotTol;
    auto pivot_of = [&](int r) {
        const double wr = w(r);
        const bool pinned = phase_ == 2 && kind(basis_[r]) == ColKind::Artificial;
        return pinned ? std::abs(wr) : wr;
    };
    double t_relaxed = std::numeric_limits<double>::infinity();
    for (int r = 0; r < m_; ++r) {
        const double piv = pivot_of(r);
        if (piv <= admit) continue;
        t_relaxed = std::min(t_relaxed, (std::max(xB_(r), 0.0) + delta) / piv);
    }
    if (!std::isfinite(t_relaxed)) {
        step = 0.0;
        return -1;
    }
    int sel = -1;
    double sel_t = 0.0, sel_piv = 0.0;
    for (int r = 0; r < m_; ++r) {
        const double piv = pivot_of(r);
        if (piv <= admit) continue;
        const double t = std::max(xB_(r), 0.0) / piv;
        if (t > t_relaxed) continue;
        const bool better =
            sel < 0 || (bland_ ? basis_[r] < basis_[sel] : piv > sel_piv);
        if (better) {
            sel = r;
            sel_t = t;
            sel_piv = piv;
        }
    }
    step = sel_t;
    return sel;
}

bool Simplex::iterate() {
    Eigen::VectorXd y(m_), w(m_), cB(m_);
    while (true) {
        if (iterations_ >= max_iterations_)
            throw SolverError("solve: iteration cap " + std::to_string(max_iterations_) +
                              " exceeded (phase " + std::to_string(phase_) + ")");
        for (int r = 0; r < m_; ++r) cB(r) = cost_(basis_[r]);
        y = cB;
        btran(y);
        const int q = price(y);
        if (q < 0) return true;  // optimal for this phase
        fetch_column(q, w);
        ftran(w);
        double step = 0.0;
        int leave = ratio_test(w, step, true);
        if (leave < 0) {
            // Recompute from a fresh factorization before accepting a weak
            // pivot or trusting a ray.
            refactorize();
            fetch_column(q, w);
            ftran(w);
            leave = ratio_test(w, step, true);
            if (leave < 0) leave = ratio_test(w, step, false);
            if (leave < 0) {
                if (phase_ == 1)
                    throw SolverError("solve: phase-1 ray detected (internal error)");
                return false;  // UNBOUNDED
            }
        }
        xB_.noalias() -= step * w;
        xB_(leave) = step;
        position_[basis_[leave]] = -1;
        basis_[leave] = q;
        position_[q] = leave;
        etas_.emplace_back(leave, w);
        ++iterations_;
        if (step <= kDegenStep) {
            if (++degen_streak_ >= opt_.bland_stall) bland_ = true;
        } else {
            degen_streak_ = 0;
            bland_ = false;
        }
        if (static_cast<int>(etas_.size()) >= opt_.refactor_every) refactorize();
    }
}

double Simplex::phase1_objective() const {
    double total = 0.0;
    for (int r = 0; r < m_; ++r)
        if (kind(basis_[r]) == ColKind::Artificial) total += std::max(xB_(r), 0.0);
    return total;
}

std::vector<double> Simplex::structural_solution() const {
    std::vector<double> x(n_, 0.0);
    for (int r = 0; r < m_; ++r)
        if (basis_[r] < n_) x[basis_[r]] = col_scale_(basis_[r]) * xB_(r);
    return x;
}

void Simplex::verify_optimal(const std::vector<double>& x) const {
    // base envelope plus the bounded per-pivot debt of the Harris ratio test
    const double tol = (10.0 + 0.01 * static_cast<double>(iterations_)) * opt_.feas_tol *
                       (1.0 + bnorm1_);
    for (double v : x)
        if (v < -tol)
            throw NumericalTrouble("solve: negative variable " + std::to_string(v) +
                                   " in reported optimum");
    for (const Row& r : lp_.rows) {
        double ax = 0.0;
        for (int j = 0; j < n_; ++j) ax += r.coeffs[j] * x[j];
        const double viol = r.rel == Relation::LE   ? ax - r.rhs
                            : r.rel == Relation::GE ? r.rhs - ax
                                                    : std::abs(ax - r.rhs);
        if (viol > tol) {
            std::ostringstream msg;
            msg << "solve: reported optimum violates a constraint by " << viol
                << " (tolerance " << tol << ")";
            throw NumericalTrouble(msg.str());
        }
    }
}

SolveResult Simplex::run(bool want_phase2) {
    SolveResult result;
    if (!iterate()) throw SolverError("solve: phase-1 unbounded (internal error)");
    refactorize();
    const double p1 = phase1_objective();
    if (p1 > opt_.feas_tol * (1.0 + bnorm1_)) {
        result.status = SolveStatus::INFEASIBLE;
        result.infeasibility_measure = p1;
        result.iterations = iterations_;
        return result;
    }
    if (!want_phase2) {
        result.status = SolveStatus::OPTIMAL;
        result.solution = structural_solution();
        result.iterations = iterations_;
        return result;
    }
    set_phase(2);
    for (int attempt = 0;; ++attempt) {
        if (!iterate()) {
            result.status = SolveStatus::UNBOUNDED;
            result.iterations = iterations_;
            return result;
        }
        refactorize();
        // Optimality certificate: no reduced cost may still be improving.
        Eigen::VectorXd cB(m_);
        for (int r = 0; r < m_; ++r) cB(r) = cost_(basis_[r]);
        btran(cB);
        if (price(cB) < 0) break;
        if (attempt >= 3) throw NumericalTrouble("solve: reduced-cost certificate failed");
    }
    result.status = SolveStatus::OPTIMAL;
    result.solution = structural_solution();
    verify_optimal(result.solution);
    // raw values verified; tiny negatives within tolerance round to zero
    for (double& v : result.solution)
        if (v < 0.0) v = 0.0;
    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += lp_.objective[j] * result.solution[j];
    result.objective_value = obj;
    result.iterations = iterations_;
    return result;
}

}  // namespace

SolveResult solve(const LinearProgram& lp, const SolverOptions& opt) {
    SolverOptions o = opt;
    for (int attempt = 0;; ++attempt) {
        try {
            Simplex s(lp, o);
            return s.run(true);
        } catch (const NumericalTrouble&) {
            if (attempt >= 2) throw;
            // rebuild with more frequent refactorization
            o.refactor_every = attempt == 0 ? std::max(1, o.refactor_every / 10) : 1;
        }
    }
}

SolveResult solve(const LinearProgram& lp, double feas_tol, double opt_tol) {
    SolverOptions opt;
    opt.feas_tol = feas_tol;
    opt.opt_tol = opt_tol;
    return solve(lp, opt);
}

Feasibility check_feasible(const LinearProgram& lp, double feas_tol) {
    SolverOptions opt;
    opt.feas_tol = feas_tol;
    SolveResult r;
    for (int attempt = 0;; ++attempt) {
        try {
            Simplex s(lp, opt);
            r = s.run(false);
            break;
        } catch (const NumericalTrouble&) {
            if (attempt >= 2) throw;
            opt.refactor_every = attempt == 0 ? std::max(1, opt.refactor_every / 10) : 1;
        }
    }
    Feasibility f;
    f.feasible = r.status == SolveStatus::OPTIMAL;
    f.infeasibility_measure = f.feasible ? 0.0 : r.infeasibility_measure;
    if (f.feasible) f.point = std::move(r.solution);
    return f;
}

void dump(const LinearProgram& lp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("dump: cannot open " + path);
    out << (lp.sense == Sense::MAX ? "max" : "min");
    for (double c : lp.objective) out << ' ' << detail::format17(c);
    out << '\n';
    for (const Row& r : lp.rows) {
        for (double a : r.coeffs) out << detail::format17(a) << ' ';
        out << (r.rel == Relation::LE ? "<=" : r.rel == Relation::GE ? ">=" : "=");
        out << ' ' << detail::format17(r.rhs) << '\n';
    }
    if (!out.good()) throw std::runtime_error("dump: write failed for " + path);
}

}  // namespace klb::lpcore
