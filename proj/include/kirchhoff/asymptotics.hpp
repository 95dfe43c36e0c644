// Blow-up side of the study: the radial ground state of the limit equation
// (shooting with bisection on the center value), rescaled-profile and decay
// diagnostics around the maximum point, and warm-started continuation in
// the homotopy weight, in the nonlocal coefficient, and in the mass.
#pragma once

#include "kirchhoff/solve.hpp"

namespace kirchhoff {

struct SolitonProfile {
    double b = 1.0;
    double p = 12.0;
    int dim = 1;
    double U0 = 0.0;                 // center value
    std::vector<double> r;           // sample radii, uniform spacing
    std::vector<double> U;           // profile values, strictly decreasing
    std::vector<double> V;           // derivative from the integrator
    double residual_max = 0.0;       // finite-difference ODE residual on samples
    double tail_value = 0.0;         // U at the last sample

    double eval(double radius) const {
        if (radius <= 0.0) return U0;
        if (radius >= r.back()) return 0.0;
        const double step = r[1] - r[0];
        const std::size_t i = std::min(U.size() - 2, static_cast<std::size_t>(radius / step));
        const double w = (radius - r[i]) / step;
        return (1.0 - w) * U[i] + w * U[i + 1];
    }
};

namespace detail {

struct ShootState {
    double r, U, V;
};

enum class ShootEvent { overshoot, undershoot, none };

// One RK4 trajectory of U'' = (U - U^{p-1})/b - (d-1)U'/r from the Taylor
// seed at r0. Returns the first classification event.
inline ShootEvent shoot_classify(double s, double b, double p, int dim, double h, double r_limit) {
    const double c2 = (s - std::pow(s, p - 1.0)) / (2.0 * b * dim);
    double r = h;
    double U = s + c2 * r * r;
    double V = 2.0 * c2 * r;
    auto accel = [&](double rr, double uu, double vv) {
        return (uu - odd_power(uu, p - 1.0)) / b - (dim - 1) * vv / rr;
    };
    while (r < r_limit) {
        const double k1u = V, k1v = accel(r, U, V);
        const double k2u = V + 0.5 * h * k1v, k2v = accel(r + 0.5 * h, U + 0.5 * h * k1u, V + 0.5 * h * k1v);
        const double k3u = V + 0.5 * h * k2v, k3v = accel(r + 0.5 * h, U + 0.5 * h * k2u, V + 0.5 * h * k2v);
        const double k4u = V + h * k3v, k4v = accel(r + h, U + h * k3u, V + h * k3v);
        U += h * (k1u + 2.0 * k2u + 2.0 * k3u + k4u) / 6.0;
        V += h * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0;
        r += h;
        if (U <= 0.0) return ShootEvent::overshoot;
        if (V > 0.0 && U < 1.0) return ShootEvent::undershoot;
        if (U > 1e6) return ShootEvent::undershoot;
    }
    return ShootEvent::none;
}

}  // namespace detail

// Ground state of -b lap U + U = U^{p-1} in dimension dim: positive,
// radially decreasing, vanishing at infinity. Bisection on U(0) between an
// undershoot at 1 and a doubled-until-overshoot upper bracket, then one
// fine trajectory sampled until the tail drops below 1e-7 of the center.
inline SolitonProfile solve_soliton(double b, double p, int dim) {
    require(b > 0.0, "solve_soliton: b must be positive");
    require(dim >= 1 && dim <= 3, "solve_soliton: dim must be 1, 2, or 3");
    require(p > 2.0 + 8.0 / dim, "solve_soliton: p below the supercritical window");
    if (dim == 3) require(p < 6.0, "solve_soliton: no decaying ground state for p >= 6 in 3d");

    const double sb = std::sqrt(b);
    const double h_coarse = 5e-4 * sb;
    const double z_limit = 60.0 * sb;

    double lo = 1.0;
    double hi = std::max(2.0, 2.0 * std::pow(0.5 * p, 1.0 / (p - 2.0)));
    int grow = 0;
    while (detail::shoot_classify(hi, b, p, dim, h_coarse, z_limit) != detail::ShootEvent::overshoot) {
        hi *= 2.0;
        if (++grow > 60)
            throw ConvergenceError("solve_soliton: failed to bracket an overshoot (tried up to U0=" +
                                   std::to_string(hi) + ")");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (detail::shoot_classify(mid, b, p, dim, h_coarse, z_limit) == detail::ShootEvent::overshoot)
            hi = mid;
        else
            lo = mid;
    }
    const double s = 0.5 * (lo + hi);

    SolitonProfile prof;
    prof.b = b;
    prof.p = p;
    prof.dim = dim;
    prof.U0 = s;

    const double h = 1e-4 * sb;
    const int stride = 2;
    const double tail = 1e-7 * s;
    const double c2 = (s - std::pow(s, p - 1.0)) / (2.0 * b * dim);
    double r = h, U = s + c2 * r * r, V = 2.0 * c2 * r;
    auto accel = [&](double rr, double uu, double vv) {
        return (uu - odd_power(uu, p - 1.0)) / b - (dim - 1) * vv / rr;
    };
    prof.r.push_back(0.0);
    prof.U.push_back(s);
    prof.V.push_back(0.0);
    long step_count = 1;
    const long max_steps = static_cast<long>(100.0 * sb / h);
    while (step_count < max_steps) {
        if (step_count % stride == 0) {
            prof.r.push_back(r);
            prof.U.push_back(U);
            prof.V.push_back(V);
            if (U <= tail) break;
        }
        if (U <= 0.0 || (V > 0.0 && U < 1.0))
            break;  // trajectory left the monotone branch before the tail target
        const double k1u = V, k1v = accel(r, U, V);
        const double k2u = V + 0.5 * h * k1v, k2v = accel(r + 0.5 * h, U + 0.5 * h * k1u, V + 0.5 * h * k1v);
        const double k3u = V + 0.5 * h * k2v, k3v = accel(r + 0.5 * h, U + 0.5 * h * k2u, V + 0.5 * h * k2v);
        const double k4u = V + h * k3v, k4v = accel(r + h, U + h * k3u, V + h * k3v);
        U += h * (k1u + 2.0 * k2u + 2.0 * k3u + k4u) / 6.0;
        V += h * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0;
        r += h;
        ++step_count;
    }
    prof.tail_value = prof.U.back();
    if (prof.tail_value > 1e-6 * s)
        throw ConvergenceError("solve_soliton: bisected trajectory left the decreasing branch at U/U0=" +
                               std::to_string(prof.tail_value / s) +
                               " (bracket [" + std::to_string(lo) + ", " + std::to_string(hi) + "])");

    // independent residual: 4th-order finite differences on the stored samples
    const double hs = prof.r[1] - prof.r[0];
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < prof.U.size(); ++i) {
        const double d1 = (-prof.U[i + 2] + 8.0 * prof.U[i + 1] - 8.0 * prof.U[i - 1] + prof.U[i - 2]) /
                          (12.0 * hs);
        const double d2 = (-prof.U[i + 2] + 16.0 * prof.U[i + 1] - 30.0 * prof.U[i] +
                           16.0 * prof.U[i - 1] - prof.U[i - 2]) /
                          (12.0 * hs * hs);
        const double res = -b * d2 - b * (dim - 1) * d1 / prof.r[i] + prof.U[i] -
                           odd_power(prof.U[i], p - 1.0);
        worst = std::max(worst, std::abs(res));
    }
    prof.residual_max = worst;
    return prof;
}

struct BlowupProfile {
    std::array<double, 2> P{};   // coordinates of the maximum point
    std::size_t P_index = 0;
    double u_max = 0.0;
    double epsilon = 0.0;        // lambda^{-1/2}
    double scale = 0.0;          // epsilon * sqrt(e)
    bool max_on_boundary_ring = false;  // anomaly, not an error
    bool lemma32_ok = false;
    double lemma32_margin = 0.0;  // rho u(P)^{p-2} - lambda
    std::vector<double> y;        // rescaled coordinates along the first axis
    std::vector<double> u_rescaled;
    std::vector<double> u_soliton;
    double sup_distance = 0.0;    // over the sampled |y| <= R window
    double gamma_fit = 0.0;       // fitted decay rate in the rescaled variable
    double C_fit = 0.0;
    double gamma_band = 0.0;      // paper-admissible rate 1/(2 sqrt(1+b))
    int decay_fit_points = 0;
    double ratio_e2_lambda = 0.0;
    double predicted_limit = 0.0;  // 4c / (b (p-4))
    double relative_gap = 0.0;
    int local_maxima = 0;          // count of pronounced interior maxima
};

inline BlowupProfile blowup_diagnose(const ProblemParams& params, const SolutionRecord& rec,
                                     const SolitonProfile& soliton, double R) {
    require(rec.lambda > 0.0, "blowup_diagnose: needs lambda > 0");
    require(params.b > 0.0, "blowup_diagnose: needs b > 0");
    require(R > 0.0, "blowup_diagnose: needs R > 0");
    const Grid& g = params.grid;

    BlowupProfile bp;
    bp.P_index = 0;
    for (std::size_t i = 1; i < rec.u.size(); ++i)
        if (rec.u.values[i] > rec.u.values[bp.P_index]) bp.P_index = i;
    bp.u_max = rec.u.values[bp.P_index];
    bp.P = g.node_coords(bp.P_index);
    if (g.dim == 1) {
        const int ix = static_cast<int>(bp.P_index);
        bp.max_on_boundary_ring = ix == 0 || ix + 1 == g.n[0];
    } else {
        const int ix = static_cast<int>(bp.P_index % static_cast<std::size_t>(g.n[0]));
        const int iy = static_cast<int>(bp.P_index / static_cast<std::size_t>(g.n[0]));
        bp.max_on_boundary_ring = ix == 0 || ix + 1 == g.n[0] || iy == 0 || iy + 1 == g.n[1];
    }

    // at a discrete interior max the equation forces rho u(P)^{p-2} >= lambda
    bp.lemma32_margin = params.rho * std::pow(bp.u_max, params.p - 2.0) - rec.lambda;
    bp.lemma32_ok = bp.lemma32_margin >= -1e-5 * rec.lambda;

    bp.epsilon = 1.0 / std::sqrt(rec.lambda);
    bp.scale = bp.epsilon * std::sqrt(rec.e);
    const double amp = std::pow(rec.lambda, -1.0 / (params.p - 2.0));

    const int nsamples = 201;
    bp.y.resize(nsamples);
    bp.u_rescaled.resize(nsamples);
    bp.u_soliton.resize(nsamples);
    double sup = 0.0;
    if (g.dim == 1) {
        for (int j = 0; j < nsamples; ++j) {
            const double yj = -R + 2.0 * R * j / (nsamples - 1);
            bp.y[static_cast<std::size_t>(j)] = yj;
            const double val = amp * field_interpolate(rec.u, bp.P[0] + bp.scale * yj);
            const double sol = soliton.eval(std::abs(yj));
            bp.u_rescaled[static_cast<std::size_t>(j)] = val;
            bp.u_soliton[static_cast<std::size_t>(j)] = sol;
            sup = std::max(sup, std::abs(val - sol));
        }
    } else {
        // profile row along the first axis; the sup scans the full 2d window
        for (int j = 0; j < nsamples; ++j) {
            const double yj = -R + 2.0 * R * j / (nsamples - 1);
            bp.y[static_cast<std::size_t>(j)] = yj;
            bp.u_rescaled[static_cast<std::size_t>(j)] =
                amp * field_interpolate(rec.u, bp.P[0] + bp.scale * yj, bp.P[1]);
            bp.u_soliton[static_cast<std::size_t>(j)] = soliton.eval(std::abs(yj));
        }
        const int ngrid = 81;
        for (int jy = 0; jy < ngrid; ++jy)
            for (int jx = 0; jx < ngrid; ++jx) {
                const double y1 = -R + 2.0 * R * jx / (ngrid - 1);
                const double y2 = -R + 2.0 * R * jy / (ngrid - 1);
                const double rad = std::sqrt(y1 * y1 + y2 * y2);
                if (rad > R) continue;
                const double val = amp * field_interpolate(rec.u, bp.P[0] + bp.scale * y1,
                                                           bp.P[1] + bp.scale * y2);
                sup = std::max(sup, std::abs(val - soliton.eval(rad)));
            }
    }
    bp.sup_distance = sup;

    // least-squares decay fit of log u against sqrt(lambda/e) |x - P|
    {
        const double rate = std::sqrt(rec.lambda / rec.e);
        const double cutoff = R * bp.scale;
        const double floor = 1e-12 * bp.u_max;
        CompensatedSum st, st2, sl, stl, cnt;
        for (std::size_t i = 0; i < rec.u.size(); ++i) {
            const double ui = rec.u.values[i];
            if (ui <= floor) continue;
            const auto xy = g.node_coords(i);
            double dist = std::abs(xy[0] - bp.P[0]);
            if (g.dim == 2)
                dist = std::sqrt(dist * dist + (xy[1] - bp.P[1]) * (xy[1] - bp.P[1]));
            if (dist <= cutoff) continue;
            const double t = rate * dist;
            const double l = std::log(ui);
            st.add(t);
            st2.add(t * t);
            sl.add(l);
            stl.add(t * l);
            cnt.add(1.0);
        }
        const double npts = cnt.value();
        bp.decay_fit_points = static_cast<int>(npts);
        if (npts >= 8.0) {
            const double det = npts * st2.value() - st.value() * st.value();
            if (std::abs(det) > 0.0) {
                const double slope = (npts * stl.value() - st.value() * sl.value()) / det;
                const double intercept = (sl.value() - slope * st.value()) / npts;
                bp.gamma_fit = -slope;
                bp.C_fit = std::exp(intercept);
            }
        }
    }
    bp.gamma_band = 0.5 / std::sqrt(1.0 + params.b);

    bp.ratio_e2_lambda = rec.e * rec.e / rec.lambda;
    bp.predicted_limit = 4.0 * params.c / (params.b * (params.p - 4.0));
    bp.relative_gap = std::abs(bp.ratio_e2_lambda - bp.predicted_limit) / bp.predicted_limit;

    // pronounced interior local maxima (k in {1,2} is the expected count)
    {
        const double bar = 0.25 * bp.u_max;
        if (g.dim == 1) {
            for (int i = 1; i + 1 < g.n[0]; ++i) {
                const double v = rec.u.values[static_cast<std::size_t>(i)];
                if (v > bar && v > rec.u.values[static_cast<std::size_t>(i) - 1] &&
                    v > rec.u.values[static_cast<std::size_t>(i) + 1])
                    ++bp.local_maxima;
            }
        } else {
            const int nx = g.n[0], ny = g.n[1];
            for (int iy = 1; iy + 1 < ny; ++iy)
                for (int ix = 1; ix + 1 < nx; ++ix) {
                    const std::size_t k = static_cast<std::size_t>(iy) * nx + ix;
                    const double v = rec.u.values[k];
                    if (v > bar && v > rec.u.values[k - 1] && v > rec.u.values[k + 1] &&
                        v > rec.u.values[k - static_cast<std::size_t>(nx)] &&
                        v > rec.u.values[k + static_cast<std::size_t>(nx)])
                        ++bp.local_maxima;
                }
        }
    }
    return bp;
}

struct ContinuationStep {
    double param = 0.0;
    double level = 0.0;
    double lambda = 0.0;
    double e = 0.0;
    double b_times_e = 0.0;
    int morse = -1;
    double residual = 0.0;
    RecordDefects defects;
    double h1_dist_prev = 0.0;
    int grid_n = 0;
    bool ok = false;
    std::string note;
};

struct ContinuationRecord {
    std::string axis;  // "rho", "b", or "c"
    std::vector<ContinuationStep> steps;
    std::vector<SolutionRecord> records;  // one per successful step
    std::vector<std::string> violations;
    std::vector<double> h1_dist_to_limit;  // sweep_b only: distance to the b=0 record
    double fit_order = 0.0;                // sweep_b only: slope of log dist vs log b
};

namespace detail {

inline double h1_distance(const Grid& g, const Field& a, const Field& b) {
    Field diff = lin_comb(1.0, a, -1.0, b);
    return std::sqrt(norm_l2_sq(g, diff) + grad_norm_sq(g, diff));
}

inline ContinuationStep step_from_record(const ProblemParams& params, const SolutionRecord& rec,
                                         double param, int morse, double h1_prev) {
    ContinuationStep s;
    s.param = param;
    s.level = rec.level;
    s.lambda = rec.lambda;
    s.e = rec.e;
    s.b_times_e = params.b * rec.e;
    s.morse = morse;
    s.residual = rec.residual;
    s.defects = rec.defects;
    s.h1_dist_prev = h1_prev;
    s.grid_n = params.grid.n[0];
    s.ok = true;
    return s;
}

}  // namespace detail

// Warm-started mountain-pass solves along an ascending homotopy grid.
// A failed step is logged and the next one restarts from the last success.
inline ContinuationRecord continue_rho(const ProblemParams& params, const GeometryCertificate& cert,
                                       const std::vector<double>& rho_grid, const SolveConfig& cfg,
                                       bool with_morse = true) {
    require(!rho_grid.empty(), "continue_rho: empty grid");
    for (std::size_t i = 0; i < rho_grid.size(); ++i) {
        require(rho_grid[i] >= 0.5 && rho_grid[i] <= 1.0, "continue_rho: rho outside [1/2, 1]");
        if (i > 0) require(rho_grid[i] > rho_grid[i - 1], "continue_rho: grid must ascend");
    }
    ContinuationRecord out;
    out.axis = "rho";
    std::ptrdiff_t prev_idx = -1;
    for (std::size_t i = 0; i < rho_grid.size(); ++i) {
        ProblemParams step_params = params;
        step_params.rho = rho_grid[i];
        ContinuationStep step;
        step.param = rho_grid[i];
        try {
            SolutionRecord rec;
            if (prev_idx < 0) {
                rec = mountain_pass_solve(step_params, cert, cfg).record;
            } else {
                const SolutionRecord& prev = out.records[static_cast<std::size_t>(prev_idx)];
                try {
                    rec = refine_newton(step_params, prev.u, prev.lambda, cfg);
                } catch (const std::exception& warm_err) {
                    step.note = std::string("warm start failed (") + warm_err.what() +
                                "); restarted from the path";
                    rec = mountain_pass_solve(step_params, cert, cfg).record;
                }
            }
            const int morse =
                with_morse ? morse_index_form(step_params, rec.u, rec.lambda, 0.0).index : -1;
            const double h1 =
                prev_idx >= 0
                    ? detail::h1_distance(params.grid, rec.u,
                                          out.records[static_cast<std::size_t>(prev_idx)].u)
                    : 0.0;
            step = detail::step_from_record(step_params, rec, rho_grid[i], morse, h1);
            out.records.push_back(std::move(rec));
            prev_idx = static_cast<std::ptrdiff_t>(out.records.size()) - 1;
        } catch (const std::exception& err) {
            step.ok = false;
            step.note = err.what();
        }
        out.steps.push_back(std::move(step));
    }
    // the minimax level is nonincreasing in the homotopy weight
    std::ptrdiff_t last = -1;
    for (std::size_t i = 0; i < out.steps.size(); ++i) {
        if (!out.steps[i].ok) continue;
        if (last >= 0 && out.steps[i].level > out.steps[static_cast<std::size_t>(last)].level + 1e-6)
            out.violations.push_back("level monotonicity in rho at rho=" +
                                     std::to_string(out.steps[i].param));
        last = static_cast<std::ptrdiff_t>(i);
    }
    return out;
}

// Warm-started solves as the nonlocal coefficient vanishes; the final entry
// must be exactly 0 and is solved by the same pipeline with the nonlocal
// terms deleted.
inline ContinuationRecord continue_b(const ProblemParams& params, const GeometryCertificate& cert,
                                     const std::vector<double>& b_grid, const SolveConfig& cfg,
                                     bool with_morse = true) {
    require(b_grid.size() >= 1, "continue_b: empty grid");
    require(b_grid.back() == 0.0, "continue_b: last entry must be 0");
    for (std::size_t i = 1; i < b_grid.size(); ++i)
        require(b_grid[i] < b_grid[i - 1], "continue_b: grid must descend");
    require(b_grid[0] == params.b, "continue_b: first entry must match params.b");

    ContinuationRecord out;
    out.axis = "b";
    std::ptrdiff_t prev_idx = -1;
    for (std::size_t i = 0; i < b_grid.size(); ++i) {
        ProblemParams step_params = params;
        step_params.b = b_grid[i];
        ContinuationStep step;
        step.param = b_grid[i];
        try {
            SolutionRecord rec;
            if (prev_idx < 0) {
                rec = mountain_pass_solve(step_params, cert, cfg).record;
            } else {
                const SolutionRecord& prev = out.records[static_cast<std::size_t>(prev_idx)];
                try {
                    rec = refine_newton(step_params, prev.u, prev.lambda, cfg);
                } catch (const std::exception& warm_err) {
                    step.note = std::string("warm start failed (") + warm_err.what() +
                                "); restarted from the path";
                    rec = mountain_pass_solve(step_params, cert, cfg).record;
                }
            }
            const int morse =
                with_morse ? morse_index_form(step_params, rec.u, rec.lambda, 0.0).index : -1;
            const double h1 =
                prev_idx >= 0
                    ? detail::h1_distance(params.grid, rec.u,
                                          out.records[static_cast<std::size_t>(prev_idx)].u)
                    : 0.0;
            step = detail::step_from_record(step_params, rec, b_grid[i], morse, h1);
            out.records.push_back(std::move(rec));
            prev_idx = static_cast<std::ptrdiff_t>(out.records.size()) - 1;
        } catch (const std::exception& err) {
            step.ok = false;
            step.note = err.what();
        }
        out.steps.push_back(std::move(step));
    }
    // levels are nondecreasing in b, so they must not increase as b drops
    std::ptrdiff_t last = -1;
    for (std::size_t i = 0; i < out.steps.size(); ++i) {
        if (!out.steps[i].ok) continue;
        if (last >= 0 &&
            out.steps[i].level > out.steps[static_cast<std::size_t>(last)].level +
                                     1e-6 * std::max(1.0, std::abs(out.steps[static_cast<std::size_t>(last)].level)))
            out.violations.push_back("level monotonicity in b at b=" +
                                     std::to_string(out.steps[i].param));
        last = static_cast<std::ptrdiff_t>(i);
    }
    // distance to the vanishing-b limit and its empirical order
    if (!out.records.empty() && out.steps.back().ok && b_grid.back() == 0.0) {
        const SolutionRecord& limit = out.records.back();
        std::size_t rec_idx = 0;
        CompensatedSum sx, sy, sxx, sxy, cnt;
        for (std::size_t i = 0; i < out.steps.size(); ++i) {
            if (!out.steps[i].ok) continue;
            const double d = detail::h1_distance(params.grid, out.records[rec_idx].u, limit.u);
            out.h1_dist_to_limit.push_back(d);
            if (out.steps[i].param > 0.0 && d > 0.0) {
                const double lx = std::log(out.steps[i].param), ly = std::log(d);
                sx.add(lx);
                sy.add(ly);
                sxx.add(lx * lx);
                sxy.add(lx * ly);
                cnt.add(1.0);
            }
            ++rec_idx;
        }
        const double npts = cnt.value();
        if (npts >= 2.0) {
            const double det = npts * sxx.value() - sx.value() * sx.value();
            if (std::abs(det) > 0.0) out.fit_order = (npts * sxy.value() - sx.value() * sy.value()) / det;
        }
    }
    return out;
}

// Mass continuation toward the concentration regime: each step shrinks c,
// warm-starts Newton from the rescaled previous solution, and refines the
// grid whenever the concentration scale sqrt(e)/sqrt(lambda) approaches the
// spacing. Steps carry the per-record blow-up diagnostics.
struct MassSweepStep {
    ContinuationStep step;
    BlowupProfile blowup;
    bool blowup_valid = false;
};

struct MassSweepResult {
    double cstar = 0.0;
    std::vector<MassSweepStep> steps;
    std::vector<SolutionRecord> records;
    std::vector<std::string> violations;
    SolitonProfile soliton;
};

inline MassSweepResult continue_mass(const ProblemParams& base_params,
                                     const std::vector<double>& c_fractions, const SolveConfig& cfg,
                                     const CertifyOptions& cert_opts, double profile_R = 3.0,
                                     int resolution_factor = 40, bool with_morse = true) {
    require(!c_fractions.empty(), "continue_mass: empty fraction grid");
    for (std::size_t i = 1; i < c_fractions.size(); ++i)
        require(c_fractions[i] < c_fractions[i - 1], "continue_mass: fractions must descend");

    MassSweepResult out;
    out.soliton = solve_soliton(base_params.b, base_params.p, base_params.grid.dim);

    // the admissible-mass threshold depends only on the domain and the
    // interpolation constant; pin it once on the base grid
    GeometryBase base = geometry_base(base_params, cert_opts);
    out.cstar = base.cstar;

    ProblemParams params = base_params;
    std::ptrdiff_t prev_idx = -1;
    for (std::size_t i = 0; i < c_fractions.size(); ++i) {
        const double c_i = c_fractions[i] * out.cstar;
        params.c = c_i;
        MassSweepStep entry;
        entry.step.param = c_i;
        try {
            SolutionRecord rec;
            if (prev_idx < 0) {
                GeometryCertificate cert = certify_geometry(params, cert_opts, base);
                rec = mountain_pass_solve(params, cert, cfg).record;
            } else {
                const SolutionRecord& prev = out.records[static_cast<std::size_t>(prev_idx)];
                Field u0 = prev.u;
                if (u0.grid != params.grid) u0 = field_regrid(u0, params.grid);
                u0 = normalize(params, u0);
                rec = refine_newton(params, u0, prev.lambda, cfg);
            }
            // escalate the grid until the peak is resolved
            for (int rounds = 0; rounds < 4; ++rounds) {
                if (rec.lambda <= 0.0) break;
                const double scale = std::sqrt(rec.e / rec.lambda);
                const double hmax =
                    params.grid.dim == 1 ? params.grid.h[0] : std::max(params.grid.h[0], params.grid.h[1]);
                if (hmax * resolution_factor <= scale) break;
                Grid finer = params.grid;
                for (int ax = 0; ax < finer.dim; ++ax) finer.n[ax] = 2 * finer.n[ax] + 1;
                finer = Grid(finer.dim, finer.extent, finer.n);
                Field u0 = field_regrid(rec.u, finer);
                ProblemParams finer_params = params;
                finer_params.grid = finer;
                u0 = normalize(finer_params, u0);
                rec = refine_newton(finer_params, u0, rec.lambda, cfg);
                params = finer_params;
            }
            const int morse = with_morse ? morse_index_form(params, rec.u, rec.lambda, 0.0).index : -1;
            double h1 = 0.0;
            if (prev_idx >= 0) {
                const SolutionRecord& prev = out.records[static_cast<std::size_t>(prev_idx)];
                Field prev_on_grid = prev.u.grid != params.grid ? field_regrid(prev.u, params.grid) : prev.u;
                h1 = detail::h1_distance(params.grid, rec.u, prev_on_grid);
            }
            entry.step = detail::step_from_record(params, rec, c_i, morse, h1);
            if (rec.lambda > 0.0) {
                entry.blowup = blowup_diagnose(params, rec, out.soliton, profile_R);
                entry.blowup_valid = true;
                if (!entry.blowup.lemma32_ok)
                    out.violations.push_back("max-point inequality at c=" + std::to_string(c_i));
            }
            out.records.push_back(std::move(rec));
            prev_idx = static_cast<std::ptrdiff_t>(out.records.size()) - 1;
        } catch (const std::exception& err) {
            entry.step.ok = false;
            entry.step.note = err.what();
        }
        out.steps.push_back(std::move(entry));
    }
    return out;
}

}  // namespace kirchhoff
