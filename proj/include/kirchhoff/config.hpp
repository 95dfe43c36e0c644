// Declarative run configuration: one JSON document, strict key checking,
// and a resolved echo written next to every run's outputs.
#pragma once

#include <optional>
#include <set>

#include "kirchhoff/io.hpp"

namespace kirchhoff {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error("config error: " + what) {}
};

struct RunConfig {
    // problem block
    double a = 1.0;
    double b = 1.0;
    std::optional<double> c;                    // absolute mass
    std::optional<double> c_fraction_of_cstar;  // or a fraction of the threshold
    double p = 12.0;
    double rho = 1.0;
    // grid block
    int dim = 1;
    std::vector<double> extent{1.0};
    std::vector<int> n{1023};
    // solver block
    SolveConfig solver;
    bool exploratory = false;
    // experiment
    std::string experiment = "solve";
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    // sweep block
    std::vector<double> rho_grid{0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::vector<double> b_grid{1.0, 1e-1, 1e-2, 1e-3, 1e-4, 0.0};
    std::vector<double> c_fractions{0.9, 0.5, 0.25, 0.1, 0.05};
    double blowup_R = 3.0;
    int gn_trials = 200;
    int boundary_samples = 100;

    Grid make_grid() const {
        if (dim == 1) return Grid::interval(extent.at(0), n.at(0));
        return Grid::rectangle(extent.at(0), extent.at(1), n.at(0), n.at(1));
    }

    ProblemParams make_params(double resolved_c) const {
        ProblemParams params;
        params.a = a;
        params.b = b;
        params.c = resolved_c;
        params.p = p;
        params.rho = rho;
        params.grid = make_grid();
        return params;
    }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <typename T>
T fetch(const nlohmann::json& j, const std::string& key, const T& fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("key '" + key + "' has the wrong type");
    }
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("top level must be a JSON object");
    detail::reject_unknown_keys(
        j, {"problem", "grid", "solver", "experiment", "output_dir", "seed", "sweep"}, "top level");

    RunConfig cfg;
    if (j.contains("problem")) {
        const auto& p = j.at("problem");
        detail::reject_unknown_keys(p, {"a", "b", "c", "c_fraction_of_cstar", "p", "rho"}, "problem");
        cfg.a = detail::fetch(p, "a", cfg.a);
        cfg.b = detail::fetch(p, "b", cfg.b);
        cfg.p = detail::fetch(p, "p", cfg.p);
        cfg.rho = detail::fetch(p, "rho", cfg.rho);
        if (p.contains("c")) cfg.c = p.at("c").get<double>();
        if (p.contains("c_fraction_of_cstar"))
            cfg.c_fraction_of_cstar = p.at("c_fraction_of_cstar").get<double>();
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        detail::reject_unknown_keys(g, {"dim", "extent", "n"}, "grid");
        cfg.dim = detail::fetch(g, "dim", cfg.dim);
        cfg.extent = detail::fetch(g, "extent", cfg.extent);
        cfg.n = detail::fetch(g, "n", cfg.n);
    }
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        detail::reject_unknown_keys(s, {"path", "newton", "krylov", "exploratory", "threads"},
                                    "solver");
        if (s.contains("path")) {
            const auto& q = s.at("path");
            detail::reject_unknown_keys(
                q, {"samples", "step", "max_sweeps", "target_residual", "max_samples"}, "solver.path");
            cfg.solver.path_samples = detail::fetch(q, "samples", cfg.solver.path_samples);
            cfg.solver.path_step = detail::fetch(q, "step", cfg.solver.path_step);
            cfg.solver.max_sweeps = detail::fetch(q, "max_sweeps", cfg.solver.max_sweeps);
            cfg.solver.target_residual = detail::fetch(q, "target_residual", cfg.solver.target_residual);
            cfg.solver.max_path_samples = detail::fetch(q, "max_samples", cfg.solver.max_path_samples);
        }
        if (s.contains("newton")) {
            const auto& q = s.at("newton");
            detail::reject_unknown_keys(q, {"tol", "max_iters"}, "solver.newton");
            cfg.solver.newton_tol = detail::fetch(q, "tol", cfg.solver.newton_tol);
            cfg.solver.newton_max_iters = detail::fetch(q, "max_iters", cfg.solver.newton_max_iters);
        }
        if (s.contains("krylov")) {
            const auto& q = s.at("krylov");
            detail::reject_unknown_keys(q, {"tol", "restart", "max_iters"}, "solver.krylov");
            cfg.solver.krylov_tol = detail::fetch(q, "tol", cfg.solver.krylov_tol);
            cfg.solver.krylov_restart = detail::fetch(q, "restart", cfg.solver.krylov_restart);
            cfg.solver.krylov_max_iters = detail::fetch(q, "max_iters", cfg.solver.krylov_max_iters);
        }
        cfg.exploratory = detail::fetch(s, "exploratory", cfg.exploratory);
        cfg.solver.nthreads = detail::fetch(s, "threads", cfg.solver.nthreads);
    }
    if (j.contains("experiment")) cfg.experiment = j.at("experiment").get<std::string>();
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        detail::reject_unknown_keys(
            s, {"rho_grid", "b_grid", "c_fractions", "blowup_R", "gn_trials", "boundary_samples"},
            "sweep");
        cfg.rho_grid = detail::fetch(s, "rho_grid", cfg.rho_grid);
        cfg.b_grid = detail::fetch(s, "b_grid", cfg.b_grid);
        cfg.c_fractions = detail::fetch(s, "c_fractions", cfg.c_fractions);
        cfg.blowup_R = detail::fetch(s, "blowup_R", cfg.blowup_R);
        cfg.gn_trials = detail::fetch(s, "gn_trials", cfg.gn_trials);
        cfg.boundary_samples = detail::fetch(s, "boundary_samples", cfg.boundary_samples);
    }

    // validation
    static const std::set<std::string> experiments{"certify", "solve",   "sweep_rho",
                                                   "sweep_b", "sweep_c", "soliton"};
    if (!experiments.count(cfg.experiment))
        throw ConfigError("experiment must be one of certify|solve|sweep_rho|sweep_b|sweep_c|soliton");
    if (cfg.a <= 0.0) throw ConfigError("problem.a must be positive");
    if (cfg.b < 0.0) throw ConfigError("problem.b must be nonnegative");
    if (cfg.b == 0.0 && cfg.experiment != "soliton")
        throw ConfigError("problem.b = 0 is reserved for the b-continuation target (use sweep_b)");
    if (cfg.dim != 1 && cfg.dim != 2) throw ConfigError("grid.dim must be 1 or 2");
    if (static_cast<int>(cfg.extent.size()) != cfg.dim)
        throw ConfigError("grid.extent must have dim entries");
    if (static_cast<int>(cfg.n.size()) != cfg.dim) throw ConfigError("grid.n must have dim entries");
    for (double L : cfg.extent)
        if (L <= 0.0) throw ConfigError("grid.extent entries must be positive");
    for (int nn : cfg.n)
        if (nn < 16) throw ConfigError("grid.n entries must be at least 16");
    if (cfg.p <= 2.0 + 8.0 / cfg.dim) throw ConfigError("problem.p must exceed 2 + 8/dim");
    if (cfg.rho < 0.5 || cfg.rho > 1.0) throw ConfigError("problem.rho must lie in [1/2, 1]");
    if (cfg.experiment != "soliton") {
        if (cfg.c && cfg.c_fraction_of_cstar)
            throw ConfigError("give problem.c or problem.c_fraction_of_cstar, not both");
        if (!cfg.c && !cfg.c_fraction_of_cstar && cfg.experiment != "sweep_c")
            throw ConfigError("problem needs c or c_fraction_of_cstar");
        if (cfg.c && *cfg.c <= 0.0) throw ConfigError("problem.c must be positive");
        if (cfg.c_fraction_of_cstar && *cfg.c_fraction_of_cstar <= 0.0)
            throw ConfigError("problem.c_fraction_of_cstar must be positive");
    }
    if (cfg.experiment == "sweep_rho") {
        if (cfg.rho_grid.empty()) throw ConfigError("sweep.rho_grid must not be empty");
        for (std::size_t i = 0; i < cfg.rho_grid.size(); ++i) {
            if (cfg.rho_grid[i] < 0.5 || cfg.rho_grid[i] > 1.0)
                throw ConfigError("sweep.rho_grid entries must lie in [1/2, 1]");
            if (i > 0 && cfg.rho_grid[i] <= cfg.rho_grid[i - 1])
                throw ConfigError("sweep.rho_grid must ascend");
        }
    }
    if (cfg.experiment == "sweep_b") {
        if (cfg.b_grid.size() < 2 || cfg.b_grid.back() != 0.0)
            throw ConfigError("sweep.b_grid must descend to a final 0");
        for (std::size_t i = 1; i < cfg.b_grid.size(); ++i)
            if (cfg.b_grid[i] >= cfg.b_grid[i - 1]) throw ConfigError("sweep.b_grid must descend");
        if (cfg.b_grid[0] != cfg.b)
            throw ConfigError("sweep.b_grid must start at problem.b");
    }
    if (cfg.experiment == "sweep_c") {
        if (cfg.c_fractions.empty()) throw ConfigError("sweep.c_fractions must not be empty");
        for (std::size_t i = 0; i < cfg.c_fractions.size(); ++i) {
            if (cfg.c_fractions[i] <= 0.0 || cfg.c_fractions[i] > 1.0)
                throw ConfigError("sweep.c_fractions must lie in (0, 1]");
            if (i > 0 && cfg.c_fractions[i] >= cfg.c_fractions[i - 1])
                throw ConfigError("sweep.c_fractions must descend");
        }
    }
    if (cfg.solver.path_samples < 17) throw ConfigError("solver.path.samples must be at least 17");
    if (cfg.solver.path_step <= 0.0) throw ConfigError("solver.path.step must be positive");
    if (cfg.gn_trials < 200) throw ConfigError("sweep.gn_trials must be at least 200");
    if (cfg.boundary_samples < 100) throw ConfigError("sweep.boundary_samples must be at least 100");
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in.good()) throw ConfigError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("JSON parse failure: ") + e.what());
    }
    return parse_config(j);
}

inline ordered_json resolved_config_json(const RunConfig& cfg) {
    ordered_json j;
    ordered_json problem;
    problem["a"] = cfg.a;
    problem["b"] = cfg.b;
    if (cfg.c) problem["c"] = *cfg.c;
    if (cfg.c_fraction_of_cstar) problem["c_fraction_of_cstar"] = *cfg.c_fraction_of_cstar;
    problem["p"] = cfg.p;
    problem["rho"] = cfg.rho;
    j["problem"] = problem;
    ordered_json grid;
    grid["dim"] = cfg.dim;
    grid["extent"] = cfg.extent;
    grid["n"] = cfg.n;
    j["grid"] = grid;
    ordered_json solver;
    solver["path"] = ordered_json{{"samples", cfg.solver.path_samples},
                                  {"step", cfg.solver.path_step},
                                  {"max_sweeps", cfg.solver.max_sweeps},
                                  {"target_residual", cfg.solver.target_residual},
                                  {"max_samples", cfg.solver.max_path_samples}};
    solver["newton"] = ordered_json{{"tol", cfg.solver.newton_tol},
                                    {"max_iters", cfg.solver.newton_max_iters}};
    solver["krylov"] = ordered_json{{"tol", cfg.solver.krylov_tol},
                                    {"restart", cfg.solver.krylov_restart},
                                    {"max_iters", cfg.solver.krylov_max_iters}};
    solver["exploratory"] = cfg.exploratory;
    solver["threads"] = cfg.solver.nthreads;
    j["solver"] = solver;
    j["experiment"] = cfg.experiment;
    j["output_dir"] = cfg.output_dir;
    j["seed"] = cfg.seed;
    ordered_json sweep;
    sweep["rho_grid"] = cfg.rho_grid;
    sweep["b_grid"] = cfg.b_grid;
    sweep["c_fractions"] = cfg.c_fractions;
    sweep["blowup_R"] = cfg.blowup_R;
    sweep["gn_trials"] = cfg.gn_trials;
    sweep["boundary_samples"] = cfg.boundary_samples;
    j["sweep"] = sweep;
    return j;
}

}  // namespace kirchhoff
