#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "klb/bootstrap.hpp"
#include "klb/inversion.hpp"
#include "klb/io.hpp"
#include "klb/version.hpp"
#include "plot_svg.hpp"

namespace klb::cli {

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;

struct CommonFlags {
    std::string config;
    std::string out_dir;
    int threads = -1;
    double s_min = std::nan("");
    double s_max = std::nan("");
    int n_v = -1;
    double feas_tol = std::nan("");
    double opt_tol = std::nan("");
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "JSON config file; explicit flags override it");
    cmd->add_option("--out-dir", f.out_dir, "output directory (default '.')");
    cmd->add_option("--threads", f.threads, "worker threads (default: available cores)");
    cmd->add_option("--s-min", f.s_min, "grid lower edge in mass^2 (default 0)");
    cmd->add_option("--s-max", f.s_max, "grid upper edge in mass^2 (default 60)");
    cmd->add_option("--n-v", f.n_v, "number of grid bins (default 10000)");
    cmd->add_option("--feas-tol", f.feas_tol, "solver feasibility tolerance (default 1e-9)");
    cmd->add_option("--opt-tol", f.opt_tol, "solver optimality tolerance (default 1e-9)");
}

// Layer the resolved configuration: file values where given, flag overrides
// on top, built-in defaults underneath.
io::RunConfig resolve(const CommonFlags& f) {
    io::RunConfig cfg;
    if (!f.config.empty()) cfg = io::load_config(f.config);
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (f.threads >= 0) cfg.threads = f.threads;
    if (!std::isnan(f.s_min)) cfg.grid.s_min = f.s_min;
    if (!std::isnan(f.s_max)) cfg.grid.s_max = f.s_max;
    if (f.n_v > 0) cfg.grid.n_v = f.n_v;
    if (!std::isnan(f.feas_tol)) cfg.solver.feas_tol = f.feas_tol;
    if (!std::isnan(f.opt_tol)) cfg.solver.opt_tol = f.opt_tol;
    return cfg;
}

std::string out_path(const io::RunConfig& cfg, const std::string& name) {
    fs::path p(name);
    if (p.is_absolute()) return name;
    fs::path dir(cfg.out_dir.empty() ? "." : cfg.out_dir);
    fs::create_directories(dir);
    return (dir / p).string();
}

int effective_threads(const io::RunConfig& cfg) {
    if (cfg.threads > 0) return cfg.threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

lpcore::SolverOptions solver_options(const io::RunConfig& cfg) {
    lpcore::SolverOptions o;
    o.feas_tol = cfg.solver.feas_tol;
    o.opt_tol = cfg.solver.opt_tol;
    return o;
}

bootstrap::BisectionConfig bisection_config(const io::RunConfig& cfg) {
    bootstrap::BisectionConfig b;
    b.slack_hi = cfg.bisection.slack_hi;
    b.slack_rel_tol = cfg.bisection.slack_rel_tol;
    b.mass_lo = cfg.bisection.mass_lo;
    b.mass_hi = cfg.bisection.mass_hi;
    b.mass_step = cfg.bisection.mass_step;
    b.mass_resolution = cfg.bisection.mass_resolution;
    b.max_iterations = cfg.bisection.max_iterations;
    b.solver = solver_options(cfg);
    b.threads = effective_threads(cfg);
    return b;
}

int sweep_exit(const inversion::BoundsTable& table) {
    for (const auto& row : table.rows)
        if (row.lower_status == lpcore::SolveStatus::OPTIMAL &&
            row.upper_status == lpcore::SolveStatus::OPTIMAL)
            return kExitOk;
    std::cerr << "no parameter produced a bounded solution; the problem is infeasible at this "
                 "slack\n";
    return kExitInfeasible;
}

int cmd_gen(const CommonFlags& common, const std::string& model_path, double x_lo, double x_hi,
            int n, const std::string& out) {
    io::RunConfig cfg = resolve(common);
    const spectral::SpectralModel model = io::read_model_json(model_path);
    const auto xs = spectral::log_spaced(x_lo, x_hi, n);
    const spectral::CorrelatorSet corr = spectral::synth_correlator(model, xs);
    const std::string path = out_path(cfg, out);
    io::write_correlator_csv(corr, path);
    std::cout << "wrote " << corr.size() << " correlator points to " << path << '\n';
    return kExitOk;
}

int cmd_bound_rho(const CommonFlags& common, const std::string& corr_path, double slack,
                  double sigma2, const std::string& mu2_range, const std::string& out) {
    io::RunConfig cfg = resolve(common);
    spectral::CorrelatorSet corr = io::read_correlator_csv(corr_path);
    corr.slack = slack;
    const auto grid = spectral::SpectralGrid::uniform(cfg.grid.s_min, cfg.grid.s_max, cfg.grid.n_v);
    const inversion::ObjectiveSpec family = inversion::GaussianSmear{0.0, std::sqrt(sigma2)};
    const auto params = io::parse_range(mu2_range);
    const auto table =
        inversion::sweep(corr, grid, family, params, solver_options(cfg), effective_threads(cfg));
    const std::string path = out_path(cfg, out);
    io::write_bounds_csv(table, path);
    std::cout << "wrote " << table.rows.size() << " smeared-density bound rows to " << path << '\n';
    return sweep_exit(table);
}

int cmd_bound_gr(const CommonFlags& common, const std::string& corr_path, double slack,
                 const std::string& t_range, double s_reg, double mass2, const std::string& out) {
    io::RunConfig cfg = resolve(common);
    spectral::CorrelatorSet corr = io::read_correlator_csv(corr_path);
    corr.slack = slack;
    const auto grid = spectral::SpectralGrid::uniform(cfg.grid.s_min, cfg.grid.s_max, cfg.grid.n_v);
    double reg = s_reg;
    if (std::isnan(reg)) {
        if (!std::isnan(mass2) && mass2 > 0.0) {
            reg = mass2 / 10.0;
        } else {
            reg = 0.0;
            std::cerr << "warning: no --s-reg and no --mass2 given; using s_reg = 0\n";
        }
    }
    const inversion::ObjectiveSpec family = inversion::Retarded{0.0, reg};
    const auto params = io::parse_range(t_range);
    const auto table =
        inversion::sweep(corr, grid, family, params, solver_options(cfg), effective_threads(cfg));
    const std::string path = out_path(cfg, out);
    io::write_bounds_csv(table, path);
    std::cout << "wrote " << table.rows.size() << " retarded-propagator bound rows to " << path
              << '\n';
    return sweep_exit(table);
}

int cmd_min_slack(const CommonFlags& common, const std::string& corr_path, double slack_hi,
                  double rel_tol, const std::string& out) {
    io::RunConfig cfg = resolve(common);
    const spectral::CorrelatorSet corr = io::read_correlator_csv(corr_path);
    const auto grid = spectral::SpectralGrid::uniform(cfg.grid.s_min, cfg.grid.s_max, cfg.grid.n_v);
    bootstrap::BisectionConfig bc = bisection_config(cfg);
    if (!std::isnan(slack_hi)) bc.slack_hi = slack_hi;
    if (!std::isnan(rel_tol)) bc.slack_rel_tol = rel_tol;
    const double dc = bootstrap::min_slack(corr, grid, bc);
    const std::string path = out_path(cfg, out);
    io::write_min_slack_result(dc, static_cast<int>(corr.size()), static_cast<int>(grid.size()),
                               path);
    std::cout << "delta_c_min = " << io::format_double(dc) << " (written to " << path << ")\n";
    return kExitOk;
}

int cmd_gap(const CommonFlags& common, const std::string& corr_path, double threshold_factor,
            double slack_hi, const std::string& out) {
    io::RunConfig cfg = resolve(common);
    const spectral::CorrelatorSet corr = io::read_correlator_csv(corr_path);
    const auto grid = spectral::SpectralGrid::uniform(cfg.grid.s_min, cfg.grid.s_max, cfg.grid.n_v);
    bootstrap::BisectionConfig bc = bisection_config(cfg);
    if (!std::isnan(slack_hi)) bc.slack_hi = slack_hi;
    const bootstrap::GapResult result = bootstrap::bootstrap_gap(corr, grid, bc, threshold_factor);
    const std::string path = out_path(cfg, out);
    io::write_gap_result(result, threshold_factor, path);
    std::cout << "M_opt = " << io::format_double(result.m_opt)
              << "  Z_opt = " << io::format_double(result.z_opt)
              << "  delta_c_min = " << io::format_double(result.slack_min) << "\n"
              << "feasible interval [" << io::format_double(result.sqrt_s1) << ", "
              << io::format_double(result.sqrt_s2) << "] (written to " << path << ")\n";
    return kExitOk;
}

int cmd_zphi(const CommonFlags& common, const std::string& corr_path, double mass2, double slack,
             const std::string& out) {
    io::RunConfig cfg = resolve(common);
    spectral::CorrelatorSet corr = io::read_correlator_csv(corr_path);
    const auto grid = spectral::SpectralGrid::uniform(cfg.grid.s_min, cfg.grid.s_max, cfg.grid.n_v);
    double dc = slack;
    if (std::isnan(dc)) {
        dc = bootstrap::min_slack(corr, grid, bisection_config(cfg));
        std::cout << "using bootstrapped slack " << io::format_double(dc) << '\n';
    }
    corr.slack = dc;
    // Stability scan of the window upper limit.
    const std::vector<double> uppers = {1.5 * mass2, 2.0 * mass2, 2.5 * mass2};
    const inversion::ObjectiveSpec family = inversion::Window{0.0, uppers.front()};
    const auto table =
        inversion::sweep(corr, grid, family, uppers, solver_options(cfg), effective_threads(cfg));
    const std::string path = out_path(cfg, out);
    io::write_bounds_csv(table, path);
    for (const auto& row : table.rows)
        std::cout << "window [0, " << io::format_double(row.parameter) << "): Z in ["
                  << io::format_double(row.lower) << ", " << io::format_double(row.upper) << "]\n";
    std::cout << "wrote window bounds to " << path << '\n';
    return sweep_exit(table);
}

int cmd_plot(const CommonFlags& common, const std::string& bounds_path, const std::string& out,
             const std::string& title) {
    io::RunConfig cfg = resolve(common);
    const auto table = io::read_bounds_csv(bounds_path);
    std::string name = out;
    if (name.empty()) name = fs::path(bounds_path).filename().replace_extension(".svg").string();
    const std::string path = out_path(cfg, name);
    render_bounds_svg(table, path, title);
    std::cout << "wrote plot to " << path << '\n';
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Rigorous bounds on spectral densities, real-time propagators and the mass gap "
                 "from Euclidean two-point data"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "synthesize a correlator CSV from a model file");
    CommonFlags gen_common;
    std::string gen_model, gen_out = "corr.csv";
    double gen_x_lo = 1e-5, gen_x_hi = 3.0;
    int gen_n = 100;
    gen->add_option("--model", gen_model, "spectral model JSON")->required();
    gen->add_option("--x-lo", gen_x_lo, "smallest x (default 1e-5)");
    gen->add_option("--x-hi", gen_x_hi, "largest x (default 3)");
    gen->add_option("--n", gen_n, "number of log-spaced points (default 100)");
    gen->add_option("--out", gen_out, "output CSV name (default corr.csv)");
    add_common(gen, gen_common);

    // bound-rho
    auto* rho = app.add_subcommand("bound-rho", "smeared-spectral-density bounds over a mu^2 sweep");
    CommonFlags rho_common;
    std::string rho_corr, rho_mu2 = "0:20:200", rho_out = "bounds_rho.csv";
    double rho_slack = 0.0, rho_sigma2 = 0.01;
    rho->add_option("--corr", rho_corr, "correlator CSV")->required();
    rho->add_option("--slack", rho_slack, "slack deltaC (default 0)");
    rho->add_option("--sigma2", rho_sigma2, "Gaussian smearing width squared (default 0.01)");
    rho->add_option("--mu2", rho_mu2, "mu^2 sweep as lo:hi:count (default 0:20:200)");
    rho->add_option("--out", rho_out, "output CSV name");
    add_common(rho, rho_common);

    // bound-gr
    auto* gr = app.add_subcommand("bound-gr", "retarded-propagator bounds over a t sweep");
    CommonFlags gr_common;
    std::string gr_corr, gr_t = "0:200:100", gr_out = "bounds_gr.csv";
    double gr_slack = 0.0, gr_s_reg = std::nan(""), gr_mass2 = std::nan("");
    gr->add_option("--corr", gr_corr, "correlator CSV")->required();
    gr->add_option("--slack", gr_slack, "slack deltaC (default 0)");
    gr->add_option("--t", gr_t, "t sweep as lo:hi:count (default 0:200:100)");
    gr->add_option("--s-reg", gr_s_reg, "bins with s <= s_reg are pinned to zero");
    gr->add_option("--mass2", gr_mass2, "gap estimate M^2; sets s_reg = M^2/10 when --s-reg absent");
    gr->add_option("--out", gr_out, "output CSV name");
    add_common(gr, gr_common);

    // min-slack
    auto* ms = app.add_subcommand("min-slack", "smallest slack consistent with a positive density");
    CommonFlags ms_common;
    std::string ms_corr, ms_out = "min_slack.json";
    double ms_hi = std::nan(""), ms_rel = std::nan("");
    ms->add_option("--corr", ms_corr, "correlator CSV")->required();
    ms->add_option("--slack-hi", ms_hi, "starting (feasible) slack (default 1e-2)");
    ms->add_option("--slack-rel-tol", ms_rel, "relative bisection tolerance (default 1e-2)");
    ms->add_option("--out", ms_out, "output JSON name");
    add_common(ms, ms_common);

    // gap
    auto* gap = app.add_subcommand("gap", "mass-gap bootstrap over the pole+continuum form");
    CommonFlags gap_common;
    std::string gap_corr, gap_out = "gap.json";
    double gap_thr = 9.0, gap_hi = std::nan("");
    gap->add_option("--corr", gap_corr, "correlator CSV")->required();
    gap->add_option("--threshold-factor", gap_thr, "continuum threshold factor: 4 or 9 (default 9)");
    gap->add_option("--slack-hi", gap_hi, "starting (feasible) slack (default 1e-2)");
    gap->add_option("--out", gap_out, "output JSON name");
    add_common(gap, gap_common);

    // zphi
    auto* zp = app.add_subcommand("zphi", "pole-weight bounds from window integrals, with a "
                                          "stability scan over upper limits {1.5,2,2.5} M^2");
    CommonFlags zp_common;
    std::string zp_corr, zp_out = "zphi.csv";
    double zp_mass2 = std::nan(""), zp_slack = std::nan("");
    zp->add_option("--corr", zp_corr, "correlator CSV")->required();
    zp->add_option("--mass2", zp_mass2, "pole mass^2 estimate")->required();
    zp->add_option("--slack", zp_slack, "slack deltaC (default: bootstrap the minimum)");
    zp->add_option("--out", zp_out, "output CSV name");
    add_common(zp, zp_common);

    // plot
    auto* plot = app.add_subcommand("plot", "render a bounds CSV to a static SVG image");
    CommonFlags plot_common;
    std::string plot_bounds, plot_out, plot_title;
    plot->add_option("--bounds", plot_bounds, "bounds CSV")->required();
    plot->add_option("--out", plot_out, "output SVG name (default: input with .svg)");
    plot->add_option("--title", plot_title, "plot title");
    add_common(plot, plot_common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitError;
    }

    try {
        if (gen->parsed())
            return cmd_gen(gen_common, gen_model, gen_x_lo, gen_x_hi, gen_n, gen_out);
        if (rho->parsed())
            return cmd_bound_rho(rho_common, rho_corr, rho_slack, rho_sigma2, rho_mu2, rho_out);
        if (gr->parsed())
            return cmd_bound_gr(gr_common, gr_corr, gr_slack, gr_t, gr_s_reg, gr_mass2, gr_out);
        if (ms->parsed()) return cmd_min_slack(ms_common, ms_corr, ms_hi, ms_rel, ms_out);
        if (gap->parsed()) return cmd_gap(gap_common, gap_corr, gap_thr, gap_hi, gap_out);
        if (zp->parsed()) return cmd_zphi(zp_common, zp_corr, zp_mass2, zp_slack, zp_out);
        if (plot->parsed()) return cmd_plot(plot_common, plot_bounds, plot_out, plot_title);
    } catch (const bootstrap::InfeasibleAtStart& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

}  // namespace klb::cli
