// CSV and JSON serialization. CSV floats carry 17 significant digits so
// round trips and regression baselines are bit-faithful.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "kirchhoff/asymptotics.hpp"

namespace kirchhoff {

using ordered_json = nlohmann::ordered_json;

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline void write_field_csv(const std::filesystem::path& path, const Field& u) {
    std::ofstream out(path);
    require(out.good(), "write_field_csv: cannot open " + path.string());
    const Grid& g = u.grid;
    out << (g.dim == 1 ? "x,u\n" : "x,y,u\n");
    for (std::size_t i = 0; i < u.size(); ++i) {
        const auto xy = g.node_coords(i);
        if (g.dim == 1)
            out << fmt17(xy[0]) << ',' << fmt17(u.values[i]) << '\n';
        else
            out << fmt17(xy[0]) << ',' << fmt17(xy[1]) << ',' << fmt17(u.values[i]) << '\n';
    }
}

inline Field read_field_csv(const Grid& g, const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), "read_field_csv: cannot open " + path.string());
    std::string line;
    std::getline(in, line);  // header
    Field u(g);
    std::size_t i = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        require(i < u.size(), "read_field_csv: more rows than interior nodes");
        const auto last_comma = line.find_last_of(',');
        require(last_comma != std::string::npos, "read_field_csv: malformed row");
        u.values[i++] = std::stod(line.substr(last_comma + 1));
    }
    require(i == u.size(), "read_field_csv: row count does not match the grid");
    return u;
}

inline ordered_json grid_to_json(const Grid& g) {
    ordered_json j;
    j["dim"] = g.dim;
    j["extent"] = g.dim == 1 ? std::vector<double>{g.extent[0]}
                             : std::vector<double>{g.extent[0], g.extent[1]};
    j["n"] = g.dim == 1 ? std::vector<int>{g.n[0]} : std::vector<int>{g.n[0], g.n[1]};
    return j;
}

inline ordered_json params_to_json(const ProblemParams& p) {
    ordered_json j;
    j["a"] = p.a;
    j["b"] = p.b;
    j["c"] = p.c;
    j["p"] = p.p;
    j["rho"] = p.rho;
    return j;
}

inline ordered_json certificate_to_json(const GeometryCertificate& cert, double c) {
    ordered_json j;
    j["lambda1"] = cert.lambda1;
    j["Cp"] = cert.Cp;
    j["cstar"] = cert.cstar;
    j["alpha0"] = cert.alpha0;
    j["beta"] = cert.beta;
    j["cbeta"] = cert.cbeta(c);
    j["k0"] = cert.k0;
    j["x1"] = std::vector<double>{cert.x1[0], cert.x1[1]};
    j["boundary_inf"] = cert.boundary_inf;
    j["boundary_samples"] = cert.boundary_samples;
    ordered_json margins;
    margins["alpha0_minus_4lambda1"] = cert.margin_alpha0;
    margins["half_cbeta_minus_J_w1"] = cert.margin_w1;
    margins["grad_w2_minus_2c_alpha0"] = cert.margin_w2_grad;
    margins["minus_J_half_w2"] = cert.margin_w2_energy;
    margins["boundary_inf_minus_cbeta"] = cert.margin_boundary_inf;
    j["margins"] = margins;
    j["violations"] = cert.violations;
    return j;
}

inline ordered_json defects_to_json(const RecordDefects& d) {
    ordered_json j;
    j["mass"] = d.mass;
    j["residual"] = d.residual;
    j["multiplier"] = d.multiplier;
    j["energy_identity"] = d.energy_identity;
    return j;
}

inline ordered_json morse_to_json(const MorseReport& m) {
    ordered_json j;
    j["index"] = m.index;
    j["theta"] = m.theta;
    j["eigenvalues"] = m.eigenvalues;
    return j;
}

inline ordered_json record_to_json(const SolutionRecord& rec) {
    ordered_json j;
    j["level"] = rec.level;
    j["lambda"] = rec.lambda;
    j["e"] = rec.e;
    j["lp"] = rec.lp;
    j["mass"] = rec.mass;
    j["residual"] = rec.residual;
    j["gradient_norm"] = rec.gradient_norm;
    j["rho"] = rec.rho;
    j["b"] = rec.b;
    j["positivity_ok"] = rec.positivity_ok;
    j["min_value"] = rec.min_value;
    j["defects"] = defects_to_json(rec.defects);
    if (rec.morse_index) j["morse"] = ordered_json{{"index", *rec.morse_index}};
    if (!rec.newton_history.empty()) j["newton_history"] = rec.newton_history;
    return j;
}

inline ordered_json blowup_to_json(const BlowupProfile& bp) {
    ordered_json j;
    j["P"] = std::vector<double>{bp.P[0], bp.P[1]};
    j["u_max"] = bp.u_max;
    j["epsilon"] = bp.epsilon;
    j["scale"] = bp.scale;
    j["max_on_boundary_ring"] = bp.max_on_boundary_ring;
    j["lemma32_ok"] = bp.lemma32_ok;
    j["lemma32_margin"] = bp.lemma32_margin;
    j["sup_distance"] = bp.sup_distance;
    j["gamma_fit"] = bp.gamma_fit;
    j["C_fit"] = bp.C_fit;
    j["gamma_band"] = bp.gamma_band;
    j["decay_fit_points"] = bp.decay_fit_points;
    j["ratio_e2_lambda"] = bp.ratio_e2_lambda;
    j["predicted_limit"] = bp.predicted_limit;
    j["relative_gap"] = bp.relative_gap;
    j["local_maxima"] = bp.local_maxima;
    return j;
}

inline void write_blowup_csv(const std::filesystem::path& path, const BlowupProfile& bp) {
    std::ofstream out(path);
    require(out.good(), "write_blowup_csv: cannot open " + path.string());
    out << "y,u_rescaled,u_soliton\n";
    for (std::size_t i = 0; i < bp.y.size(); ++i)
        out << fmt17(bp.y[i]) << ',' << fmt17(bp.u_rescaled[i]) << ',' << fmt17(bp.u_soliton[i])
            << '\n';
}

inline void write_soliton_csv(const std::filesystem::path& path, const SolitonProfile& prof) {
    std::ofstream out(path);
    require(out.good(), "write_soliton_csv: cannot open " + path.string());
    out << "r,U,dU\n";
    for (std::size_t i = 0; i < prof.r.size(); ++i)
        out << fmt17(prof.r[i]) << ',' << fmt17(prof.U[i]) << ',' << fmt17(prof.V[i]) << '\n';
}

inline void write_continuation_csv(const std::filesystem::path& path, const ContinuationRecord& rec) {
    std::ofstream out(path);
    require(out.good(), "write_continuation_csv: cannot open " + path.string());
    out << "param,level,lambda,e,b_times_e,morse,residual,defect_mass,defect_residual,"
           "defect_multiplier,defect_energy,h1_dist_prev,grid_n,ok,note\n";
    for (const auto& s : rec.steps) {
        out << fmt17(s.param) << ',' << fmt17(s.level) << ',' << fmt17(s.lambda) << ','
            << fmt17(s.e) << ',' << fmt17(s.b_times_e) << ',' << s.morse << ',' << fmt17(s.residual)
            << ',' << fmt17(s.defects.mass) << ',' << fmt17(s.defects.residual) << ','
            << fmt17(s.defects.multiplier) << ',' << fmt17(s.defects.energy_identity) << ','
            << fmt17(s.h1_dist_prev) << ',' << s.grid_n << ',' << (s.ok ? 1 : 0) << ',' << '"'
            << s.note << '"' << '\n';
    }
}

inline void write_mass_sweep_csv(const std::filesystem::path& path, const MassSweepResult& sweep) {
    std::ofstream out(path);
    require(out.good(), "write_mass_sweep_csv: cannot open " + path.string());
    out << "param,level,lambda,e,b_times_e,morse,residual,defect_mass,defect_residual,"
           "defect_multiplier,defect_energy,h1_dist_prev,grid_n,lemma32_margin,e2_over_lambda,"
           "predicted_limit,relative_gap,sup_distance,gamma_fit,ok,note\n";
    for (const auto& entry : sweep.steps) {
        const auto& s = entry.step;
        out << fmt17(s.param) << ',' << fmt17(s.level) << ',' << fmt17(s.lambda) << ','
            << fmt17(s.e) << ',' << fmt17(s.b_times_e) << ',' << s.morse << ',' << fmt17(s.residual)
            << ',' << fmt17(s.defects.mass) << ',' << fmt17(s.defects.residual) << ','
            << fmt17(s.defects.multiplier) << ',' << fmt17(s.defects.energy_identity) << ','
            << fmt17(s.h1_dist_prev) << ',' << s.grid_n << ',';
        if (entry.blowup_valid)
            out << fmt17(entry.blowup.lemma32_margin) << ',' << fmt17(entry.blowup.ratio_e2_lambda)
                << ',' << fmt17(entry.blowup.predicted_limit) << ','
                << fmt17(entry.blowup.relative_gap) << ',' << fmt17(entry.blowup.sup_distance) << ','
                << fmt17(entry.blowup.gamma_fit);
        else
            out << ",,,,,";
        out << ',' << (s.ok ? 1 : 0) << ',' << '"' << s.note << '"' << '\n';
    }
}

}  // namespace kirchhoff
