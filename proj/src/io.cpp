#include "klb/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "klb/numformat.hpp"
#include "klb/version.hpp"

namespace klb::io {

using nlohmann::json;

std::string format_double(double v) { return detail::format17(v); }

double parse_double(const std::string& text, const std::string& context) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw ParseError(context + ": not a number: '" + text + "'");
    return v;
}

namespace {

std::ifstream open_in(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw ParseError(std::string(what) + ": cannot open " + path);
    return in;
}

std::ofstream open_out(const std::string& path, const char* what) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(std::string(what) + ": cannot open " + path);
    return out;
}

std::string chomp(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

lpcore::SolveStatus status_from_string(const std::string& s, const std::string& context) {
    if (s == "OPTIMAL") return lpcore::SolveStatus::OPTIMAL;
    if (s == "INFEASIBLE") return lpcore::SolveStatus::INFEASIBLE;
    if (s == "UNBOUNDED") return lpcore::SolveStatus::UNBOUNDED;
    throw ParseError(context + ": unknown status '" + s + "'");
}

json parse_json_file(const std::string& path, const char* what) {
    std::ifstream in = open_in(path, what);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string(what) + ": " + path + ": " + e.what());
    }
}

void write_json_file(const json& j, const std::string& path, const char* what) {
    std::ofstream out = open_out(path, what);
    out << j.dump(2) << '\n';
    if (!out.good()) throw std::runtime_error(std::string(what) + ": write failed for " + path);
}

}  // namespace

spectral::CorrelatorSet read_correlator_csv(const std::string& path) {
    std::ifstream in = open_in(path, "read_correlator_csv");
    std::string line;
    if (!std::getline(in, line) || chomp(line) != "x,C")
        throw ParseError("read_correlator_csv: " + path + ": expected header 'x,C'");
    spectral::CorrelatorSet corr;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = chomp(line);
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        const std::string where = path + ":" + std::to_string(lineno);
        if (fields.size() != 2) throw ParseError(where + ": expected two fields");
        const double x = parse_double(fields[0], where);
        const double c = parse_double(fields[1], where);
        if (!std::isfinite(x) || !std::isfinite(c))
            throw ParseError(where + ": non-finite value");
        if (x <= 0.0) throw ParseError(where + ": x must be positive");
        if (!corr.points.empty() && x <= corr.points.back())
            throw ParseError(where + ": x must be strictly increasing");
        corr.points.push_back(x);
        corr.values.push_back(c);
    }
    if (corr.points.empty())
        throw ParseError("read_correlator_csv: " + path + ": no records");
    corr.slack = 0.0;
    return corr;
}

void write_correlator_csv(const spectral::CorrelatorSet& corr, const std::string& path) {
    std::ofstream out = open_out(path, "write_correlator_csv");
    out << "x,C\n";
    for (std::size_t i = 0; i < corr.size(); ++i)
        out << format_double(corr.points[i]) << ',' << format_double(corr.values[i]) << '\n';
    if (!out.good())
        throw std::runtime_error("write_correlator_csv: write failed for " + path);
}

void write_bounds_csv(const inversion::BoundsTable& table, const std::string& path) {
    std::ofstream out = open_out(path, "write_bounds_csv");
    out << "parameter,lower,upper,lower_status,upper_status\n";
    for (const auto& row : table.rows)
        out << format_double(row.parameter) << ',' << format_double(row.lower) << ','
            << format_double(row.upper) << ',' << lpcore::to_string(row.lower_status) << ','
            << lpcore::to_string(row.upper_status) << '\n';
    if (!out.good()) throw std::runtime_error("write_bounds_csv: write failed for " + path);

    json meta;
    meta["slack"] = table.slack;
    meta["n_c"] = table.n_c;
    meta["n_v"] = table.n_v;
    meta["grid"] = {{"s_min", table.s_min}, {"s_max", table.s_max}};
    meta["objective"] = table.objective;
    meta["version"] = kVersion;
    write_json_file(meta, path + ".meta.json", "write_bounds_csv");
}

inversion::BoundsTable read_bounds_csv(const std::string& path) {
    std::ifstream in = open_in(path, "read_bounds_csv");
    std::string line;
    if (!std::getline(in, line) ||
        chomp(line) != "parameter,lower,upper,lower_status,upper_status")
        throw ParseError("read_bounds_csv: " + path + ": bad header");
    inversion::BoundsTable table;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = chomp(line);
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        const std::string where = path + ":" + std::to_string(lineno);
        if (fields.size() != 5) throw ParseError(where + ": expected five fields");
        inversion::BoundsRow row;
        row.parameter = parse_double(fields[0], where);
        row.lower = parse_double(fields[1], where);
        row.upper = parse_double(fields[2], where);
        row.lower_status = status_from_string(fields[3], where);
        row.upper_status = status_from_string(fields[4], where);
        table.rows.push_back(row);
    }
    std::ifstream meta_in(path + ".meta.json");
    if (meta_in) {
        try {
            const json meta = json::parse(meta_in);
            table.slack = meta.value("slack", 0.0);
            table.n_c = meta.value("n_c", 0);
            table.n_v = meta.value("n_v", 0);
            if (meta.contains("grid")) {
                table.s_min = meta["grid"].value("s_min", 0.0);
                table.s_max = meta["grid"].value("s_max", 0.0);
            }
            table.objective = meta.value("objective", "");
        } catch (const json::exception&) {
            // sidecar is advisory for reading; a broken one is ignored
        }
    }
    return table;
}

spectral::SpectralModel read_model_json(const std::string& path) {
    const json j = parse_json_file(path, "read_model_json");
    std::vector<std::string> problems;
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "pole_weight" && key != "pole_mass2" && key != "threshold" &&
            key != "continuum" && key != "normalized")
            problems.push_back("unknown key '" + key + "'");
    }
    for (const char* key : {"pole_weight", "pole_mass2", "threshold"})
        if (!j.contains(key))
            problems.push_back(std::string("missing key '") + key + "'");
        else if (!j[key].is_number())
            problems.push_back(std::string("key '") + key + "' must be a number");
    std::vector<spectral::ContinuumPoint> continuum;
    if (j.contains("continuum")) {
        if (!j["continuum"].is_array()) {
            problems.push_back("key 'continuum' must be an array of [s, rho] pairs");
        } else {
            for (const auto& entry : j["continuum"]) {
                if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() ||
                    !entry[1].is_number()) {
                    problems.push_back("continuum entries must be [s, rho] number pairs");
                    break;
                }
                continuum.push_back({entry[0].get<double>(), entry[1].get<double>()});
            }
        }
    }
    if (j.contains("normalized") && !j["normalized"].is_boolean())
        problems.push_back("key 'normalized' must be a boolean");
    if (!problems.empty()) {
        std::string msg = "read_model_json: " + path + ":";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ParseError(msg);
    }
    return spectral::SpectralModel(j["pole_weight"].get<double>(), j["pole_mass2"].get<double>(),
                                   j["threshold"].get<double>(), std::move(continuum),
                                   j.value("normalized", false));
}

void write_model_json(const spectral::SpectralModel& model, const std::string& path) {
    json j;
    j["pole_weight"] = model.pole_weight();
    j["pole_mass2"] = model.pole_mass2();
    j["threshold"] = model.threshold();
    json tab = json::array();
    for (const auto& p : model.continuum()) tab.push_back({p.s, p.rho});
    j["continuum"] = std::move(tab);
    j["normalized"] = model.normalized();
    write_json_file(j, path, "write_model_json");
}

void write_gap_result(const bootstrap::GapResult& result, double threshold_factor,
                      const std::string& path) {
    json j;
    j["m_opt"] = result.m_opt;
    j["z_opt"] = result.z_opt;
    j["delta_c_min"] = result.slack_min;
    j["interval"] = {{"sqrt_s1", result.sqrt_s1}, {"sqrt_s2", result.sqrt_s2}};
    j["threshold_factor"] = threshold_factor;
    j["diagnostics"] = {{"outer_iterations", result.diagnostics.outer_iterations},
                        {"feasibility_solves", result.diagnostics.feasibility_solves},
                        {"z_lo", result.diagnostics.z_lo},
                        {"z_hi", result.diagnostics.z_hi},
                        {"collapsed", result.diagnostics.collapsed}};
    j["version"] = kVersion;
    write_json_file(j, path, "write_gap_result");
}

void write_min_slack_result(double slack_min, int n_c, int n_v, const std::string& path) {
    json j;
    j["delta_c_min"] = slack_min;
    j["n_c"] = n_c;
    j["n_v"] = n_v;
    j["version"] = kVersion;
    write_json_file(j, path, "write_min_slack_result");
}

namespace {

// Schema-checked extraction helpers; every problem is collected so the
// error report names all of them at once.
struct ConfigReader {
    std::vector<std::string>& problems;

    template <class T>
    void number(const json& j, const char* section, const char* key, T& out) {
        if (!j.contains(key)) return;
        const auto& v = j[key];
        const std::string where = section[0] ? std::string(section) + "." + key : key;
        if constexpr (std::is_same_v<T, int>) {
            if (!v.is_number_integer()) {
                problems.push_back(where + ": expected an integer");
                return;
            }
            out = v.get<int>();
        } else {
            if (!v.is_number()) {
                problems.push_back(where + ": expected a number");
                return;
            }
            out = v.get<double>();
        }
    }

    void text(const json& j, const char* section, const char* key, std::string& out) {
        if (!j.contains(key)) return;
        if (!j[key].is_string()) {
            const std::string where =
                section[0] ? std::string(section) + "." + key : key;
            problems.push_back(where + ": expected a string");
            return;
        }
        out = j[key].get<std::string>();
    }

    void known_keys(const json& j, const char* section,
                    std::initializer_list<const char*> keys) {
        for (const auto& [key, value] : j.items()) {
            (void)value;
            bool ok = false;
            for (const char* k : keys) ok = ok || key == k;
            if (!ok)
                problems.push_back(std::string("unknown key '") +
                                   (section[0] ? std::string(section) + "." + key : key) + "'");
        }
    }
};

}  // namespace

RunConfig load_config(const std::string& path) {
    const json j = parse_json_file(path, "load_config");
    if (!j.is_object()) throw ParseError("load_config: " + path + ": expected a JSON object");
    RunConfig cfg;
    std::vector<std::string> problems;
    ConfigReader r{problems};

    r.known_keys(j, "",
                 {"input", "model", "out_dir", "slack", "threads", "grid", "x_window",
                  "objective", "bisection", "solver"});
    r.text(j, "", "input", cfg.input);
    r.text(j, "", "model", cfg.model);
    r.text(j, "", "out_dir", cfg.out_dir);
    r.number(j, "", "slack", cfg.slack);
    r.number(j, "", "threads", cfg.threads);

    if (j.contains("grid") && j["grid"].is_object()) {
        const auto& g = j["grid"];
        r.known_keys(g, "grid", {"s_min", "s_max", "n_v"});
        r.number(g, "grid", "s_min", cfg.grid.s_min);
        r.number(g, "grid", "s_max", cfg.grid.s_max);
        r.number(g, "grid", "n_v", cfg.grid.n_v);
    } else if (j.contains("grid")) {
        problems.push_back("grid: expected an object");
    }

    if (j.contains("x_window") && j["x_window"].is_object()) {
        const auto& w = j["x_window"];
        r.known_keys(w, "x_window", {"x_lo", "x_hi", "n_c"});
        r.number(w, "x_window", "x_lo", cfg.x_window.x_lo);
        r.number(w, "x_window", "x_hi", cfg.x_window.x_hi);
        r.number(w, "x_window", "n_c", cfg.x_window.n_c);
    } else if (j.contains("x_window")) {
        problems.push_back("x_window: expected an object");
    }

    if (j.contains("objective") && j["objective"].is_object()) {
        const auto& o = j["objective"];
        r.known_keys(o, "objective",
                     {"sigma2", "mu2", "t", "s_reg", "window_a", "window_b", "mass2",
                      "threshold_factor"});
        r.number(o, "objective", "sigma2", cfg.objective.sigma2);
        r.text(o, "objective", "mu2", cfg.objective.mu2_range);
        r.text(o, "objective", "t", cfg.objective.t_range);
        r.number(o, "objective", "s_reg", cfg.objective.s_reg);
        r.number(o, "objective", "window_a", cfg.objective.window_a);
        r.number(o, "objective", "window_b", cfg.objective.window_b);
        r.number(o, "objective", "mass2", cfg.objective.mass2);
        r.number(o, "objective", "threshold_factor", cfg.objective.threshold_factor);
    } else if (j.contains("objective")) {
        problems.push_back("objective: expected an object");
    }

    if (j.contains("bisection") && j["bisection"].is_object()) {
        const auto& b = j["bisection"];
        r.known_keys(b, "bisection",
                     {"slack_hi", "slack_rel_tol", "m_lo", "m_hi", "m_step", "mass_resolution",
                      "max_iterations"});
        r.number(b, "bisection", "slack_hi", cfg.bisection.slack_hi);
        r.number(b, "bisection", "slack_rel_tol", cfg.bisection.slack_rel_tol);
        r.number(b, "bisection", "m_lo", cfg.bisection.mass_lo);
        r.number(b, "bisection", "m_hi", cfg.bisection.mass_hi);
        r.number(b, "bisection", "m_step", cfg.bisection.mass_step);
        r.number(b, "bisection", "mass_resolution", cfg.bisection.mass_resolution);
        r.number(b, "bisection", "max_iterations", cfg.bisection.max_iterations);
    } else if (j.contains("bisection")) {
        problems.push_back("bisection: expected an object");
    }

    if (j.contains("solver") && j["solver"].is_object()) {
        const auto& s = j["solver"];
        r.known_keys(s, "solver", {"feas_tol", "opt_tol"});
        r.number(s, "solver", "feas_tol", cfg.solver.feas_tol);
        r.number(s, "solver", "opt_tol", cfg.solver.opt_tol);
    } else if (j.contains("solver")) {
        problems.push_back("solver: expected an object");
    }

    if (cfg.grid.n_v < 2) problems.push_back("grid.n_v: must be >= 2");
    if (!(cfg.grid.s_max > cfg.grid.s_min)) problems.push_back("grid: need s_max > s_min");
    if (cfg.x_window.n_c < 1) problems.push_back("x_window.n_c: must be >= 1");
    if (!(cfg.x_window.x_lo > 0.0) || !(cfg.x_window.x_hi > cfg.x_window.x_lo))
        problems.push_back("x_window: need 0 < x_lo < x_hi");
    if (cfg.slack < 0.0) problems.push_back("slack: must be >= 0");

    if (!problems.empty()) {
        std::string msg = "load_config: " + path + ":";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ParseError(msg);
    }
    return cfg;
}

std::vector<double> parse_range(const std::string& spec) {
    const auto parts = split(spec, ':');
    if (parts.size() == 1) return {parse_double(parts[0], "parse_range")};
    if (parts.size() != 3)
        throw ParseError("parse_range: expected 'lo:hi:count', got '" + spec + "'");
    const double lo = parse_double(parts[0], "parse_range lo");
    const double hi = parse_double(parts[1], "parse_range hi");
    const double count_raw = parse_double(parts[2], "parse_range count");
    const int count = static_cast<int>(count_raw);
    if (count < 1 || count != count_raw)
        throw ParseError("parse_range: count must be a positive integer in '" + spec + "'");
    if (count == 1) return {lo};
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) out[i] = lo + (hi - lo) * i / (count - 1);
    return out;
}

}  // namespace klb::io
