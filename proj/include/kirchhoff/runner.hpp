// Experiment orchestration: certify -> solve -> index -> diagnose ->
// continue, with persisted reports, CSV sidecars, and a human-readable
// summary. Exit codes: 0 all invariants hold, 1 named invariant violated,
// 2 config error (decided by the caller), 3 solver non-convergence.
#pragma once

#include <chrono>

#include "kirchhoff/config.hpp"

namespace kirchhoff {

namespace detail {

class RunWriter {
public:
    RunWriter(const RunConfig& cfg, const std::filesystem::path& dir) : cfg_(cfg), dir_(dir) {
        std::filesystem::create_directories(dir_);
        report_["experiment"] = cfg.experiment;
        report_["seed"] = cfg.seed;
        report_["threads"] = cfg.solver.nthreads;
        lines_.push_back("experiment: " + cfg.experiment);
        std::ofstream cfg_out(dir_ / "resolved_config.json");
        cfg_out << resolved_config_json(cfg).dump(2) << '\n';
    }

    ordered_json& report() { return report_; }
    const std::filesystem::path& dir() const { return dir_; }

    void note(const std::string& line) { lines_.push_back(line); }

    void invariant_violation(const std::string& name) {
        violations_.push_back(name);
        lines_.push_back("VIOLATED: " + name);
    }

    int finish(int exit_code) {
        report_["invariants_ok"] = violations_.empty();
        report_["violations"] = violations_;
        report_["exit_code"] = violations_.empty() ? exit_code : std::max(exit_code, 1);
        std::ofstream rep(dir_ / "report.json");
        rep << report_.dump(2) << '\n';
        std::ofstream sum(dir_ / "summary.txt");
        for (const auto& l : lines_) sum << l << '\n';
        if (!violations_.empty()) {
            sum << "result: FAIL (" << violations_.size() << " invariant violation(s))\n";
            return std::max(exit_code, 1);
        }
        sum << (exit_code == 0 ? "result: OK\n" : "result: FAIL\n");
        return exit_code;
    }

    bool has_violations() const { return !violations_.empty(); }

private:
    RunConfig cfg_;
    std::filesystem::path dir_;
    ordered_json report_;
    std::vector<std::string> lines_;
    std::vector<std::string> violations_;
};

inline CertifyOptions certify_options(const RunConfig& cfg) {
    CertifyOptions opts;
    opts.enforce = !cfg.exploratory;
    opts.gn_trials = cfg.gn_trials;
    opts.boundary_samples = cfg.boundary_samples;
    opts.nthreads = cfg.solver.nthreads;
    opts.seed = cfg.seed;
    return opts;
}

// Resolves the prescribed mass, via the threshold when given as a fraction.
inline double resolve_mass(const RunConfig& cfg, const GeometryBase& base, RunWriter& w) {
    if (cfg.c) return *cfg.c;
    const double frac = cfg.c_fraction_of_cstar.value();
    const double c = frac * base.cstar;
    w.report()["resolved_c"] = c;
    w.note("resolved c = " + fmt17(c) + " (" + fmt17(frac) + " of cstar = " + fmt17(base.cstar) + ")");
    return c;
}

inline void emit_record(RunWriter& w, const SolutionRecord& rec) {
    ordered_json j = record_to_json(rec);
    for (auto it = j.begin(); it != j.end(); ++it) w.report()[it.key()] = it.value();
    w.note("level  = " + fmt17(rec.level));
    w.note("lambda = " + fmt17(rec.lambda));
    w.note("e      = " + fmt17(rec.e));
    w.note("residual = " + fmt17(rec.residual));
}

inline void enforce_record(RunWriter& w, const SolutionRecord& rec, const char* where) {
    for (const auto& v : record_violations(rec))
        w.invariant_violation(std::string(where) + ": " + v);
}

}  // namespace detail

inline int run_experiment(const RunConfig& cfg_in, const std::string& out_override = "",
                          int threads_override = 0, bool exploratory_flag = false) {
    RunConfig cfg = cfg_in;
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (threads_override > 0) cfg.solver.nthreads = threads_override;
    if (exploratory_flag) cfg.exploratory = true;

    detail::RunWriter w(cfg, cfg.output_dir);
    const auto t_start = std::chrono::steady_clock::now();
    int exit_code = 0;
    try {
        if (cfg.experiment == "soliton") {
            SolitonProfile prof = solve_soliton(cfg.b, cfg.p, cfg.dim);
            ordered_json j;
            j["b"] = prof.b;
            j["p"] = prof.p;
            j["dim"] = prof.dim;
            j["U0"] = prof.U0;
            j["residual_max"] = prof.residual_max;
            j["tail_value"] = prof.tail_value;
            j["r_max"] = prof.r.back();
            w.report()["soliton"] = j;
            w.report()["U0"] = prof.U0;
            write_soliton_csv(w.dir() / "soliton.csv", prof);
            w.note("U0 = " + fmt17(prof.U0));
            w.note("ODE residual max = " + fmt17(prof.residual_max));
        } else {
            const CertifyOptions copts = detail::certify_options(cfg);
            ProblemParams params = cfg.make_params(1.0);

            if (cfg.experiment == "sweep_c") {
                MassSweepResult sweep = continue_mass(params, cfg.c_fractions, cfg.solver, copts,
                                                      cfg.blowup_R);
                w.report()["cstar"] = sweep.cstar;
                write_mass_sweep_csv(w.dir() / "mass_sweep.csv", sweep);
                ordered_json steps = ordered_json::array();
                std::size_t rec_idx = 0;
                for (std::size_t i = 0; i < sweep.steps.size(); ++i) {
                    const auto& entry = sweep.steps[i];
                    ordered_json sj;
                    sj["c"] = entry.step.param;
                    sj["ok"] = entry.step.ok;
                    sj["note"] = entry.step.note;
                    if (entry.step.ok) {
                        sj["level"] = entry.step.level;
                        sj["lambda"] = entry.step.lambda;
                        sj["e"] = entry.step.e;
                        sj["morse"] = entry.step.morse;
                        sj["grid_n"] = entry.step.grid_n;
                        if (entry.blowup_valid) {
                            sj["blowup"] = blowup_to_json(entry.blowup);
                            write_blowup_csv(w.dir() / ("profile_" + std::to_string(i) + ".csv"),
                                             entry.blowup);
                        }
                        if (entry.step.morse > 2)
                            w.invariant_violation("morse index <= 2 at c=" + fmt17(entry.step.param));
                        ++rec_idx;
                    } else {
                        w.note("step c=" + fmt17(entry.step.param) + " failed: " + entry.step.note);
                    }
                    steps.push_back(sj);
                }
                (void)rec_idx;
                w.report()["steps"] = steps;
                for (const auto& v : sweep.violations) w.invariant_violation(v);
                if (sweep.records.empty()) throw ConvergenceError("mass sweep produced no records");
                if (!sweep.records.empty())
                    write_field_csv(w.dir() / "u_final.csv", sweep.records.back().u);
            } else {
                GeometryBase base = geometry_base(params, copts);
                params.c = detail::resolve_mass(cfg, base, w);
                params.validate(false);
                GeometryCertificate cert = certify_geometry(params, copts, base);
                w.report()["certificate"] = certificate_to_json(cert, params.c);
                write_field_csv(w.dir() / "w1.csv", cert.w1);
                write_field_csv(w.dir() / "w2.csv", cert.w2);
                for (const auto& v : cert.violations)
                    w.note("exploratory: certificate inequality not satisfied: " + v);
                w.note("lambda1 = " + fmt17(cert.lambda1) + ", Cp = " + fmt17(cert.Cp) +
                       ", cstar = " + fmt17(cert.cstar));

                if (cfg.experiment == "certify") {
                    // nothing further; the certificate is the artifact
                } else if (cfg.experiment == "solve") {
                    MountainPassResult mp = mountain_pass_solve(params, cert, cfg.solver);
                    SolutionRecord& rec = mp.record;
                    MorseReport morse = morse_index_form(params, rec.u, rec.lambda, 0.0);
                    rec.morse_index = morse.index;
                    detail::emit_record(w, rec);
                    w.report()["morse"] = morse_to_json(morse);
                    w.report()["deform"] = ordered_json{
                        {"sweeps", mp.sweeps},
                        {"final_max_energy", mp.max_energy_history.back()},
                        {"final_argmax_residual", mp.argmax_residual_history.back()}};
                    write_field_csv(w.dir() / "u.csv", rec.u);
                    {
                        std::ofstream hist(w.dir() / "deform_history.csv");
                        hist << "sweep,max_energy,argmax_residual\n";
                        for (std::size_t s = 0; s < mp.max_energy_history.size(); ++s)
                            hist << s << ',' << fmt17(mp.max_energy_history[s]) << ','
                                 << fmt17(mp.argmax_residual_history[s]) << '\n';
                    }
                    detail::enforce_record(w, rec, "solve");
                    if (!rec.positivity_ok) w.invariant_violation("solve: interior positivity");
                    if (rec.level < cert.cbeta(params.c) - 1e-9 * std::max(1.0, cert.cbeta(params.c)))
                        w.invariant_violation("solve: level >= c beta");
                    if (morse.index > 2) w.invariant_violation("solve: morse index <= 2");
                } else if (cfg.experiment == "sweep_rho") {
                    ContinuationRecord cont = continue_rho(params, cert, cfg.rho_grid, cfg.solver);
                    write_continuation_csv(w.dir() / "continuation.csv", cont);
                    for (const auto& v : cont.violations) w.invariant_violation(v);
                    int ok_steps = 0;
                    for (const auto& s : cont.steps) {
                        if (s.ok) ++ok_steps;
                        if (s.ok && s.morse > 2)
                            w.invariant_violation("morse index <= 2 at rho=" + fmt17(s.param));
                        if (!s.ok) w.note("step rho=" + fmt17(s.param) + " failed: " + s.note);
                    }
                    if (ok_steps == 0) throw ConvergenceError("rho sweep produced no records");
                    if (!cont.records.empty())
                        write_field_csv(w.dir() / "u_final.csv", cont.records.back().u);
                    ordered_json levels = ordered_json::array();
                    for (const auto& s : cont.steps)
                        if (s.ok) levels.push_back(ordered_json{{"rho", s.param}, {"level", s.level}});
                    w.report()["levels"] = levels;
                } else if (cfg.experiment == "sweep_b") {
                    ContinuationRecord cont = continue_b(params, cert, cfg.b_grid, cfg.solver);
                    write_continuation_csv(w.dir() / "continuation.csv", cont);
                    for (const auto& v : cont.violations) w.invariant_violation(v);
                    for (const auto& s : cont.steps) {
                        if (s.ok && s.morse > 2)
                            w.invariant_violation("morse index <= 2 at b=" + fmt17(s.param));
                        if (!s.ok) w.note("step b=" + fmt17(s.param) + " failed: " + s.note);
                    }
                    if (cont.steps.empty() || !cont.steps.back().ok)
                        throw ConvergenceError("b sweep: the b=0 target failed");
                    const SolutionRecord& limit = cont.records.back();
                    write_field_csv(w.dir() / "u_limit.csv", limit.u);
                    w.report()["limit"] = record_to_json(limit);
                    w.report()["h1_dist_to_limit"] = cont.h1_dist_to_limit;
                    w.report()["fit_order"] = cont.fit_order;
                    w.note("b->0 fit order = " + fmt17(cont.fit_order));
                }
            }
        }
    } catch (const GeometryNotCertifiedError& e) {
        w.invariant_violation(std::string("geometry: ") + e.what());
        w.report()["cstar"] = e.cstar;
        exit_code = 1;
    } catch (const CertificateViolationError& e) {
        w.invariant_violation(std::string("certificate: ") + e.name);
        exit_code = 1;
    } catch (const InvariantViolationError& e) {
        w.invariant_violation(e.name);
        exit_code = 1;
    } catch (const ConvergenceError& e) {
        w.note(std::string("non-convergence: ") + e.what());
        w.report()["error"] = e.what();
        exit_code = 3;
    } catch (const std::exception& e) {
        w.note(std::string("error: ") + e.what());
        w.report()["error"] = e.what();
        exit_code = 1;
    }
    const auto t_end = std::chrono::steady_clock::now();
    // wall time goes to the summary only; report.json stays bit-identical
    // across reruns of the same config and seed
    w.note("wall_seconds = " +
           std::to_string(std::chrono::duration_cast<std::chrono::milliseconds>(t_end - t_start)
                              .count() /
                          1000.0));
    return w.finish(exit_code);
}

}  // namespace kirchhoff
