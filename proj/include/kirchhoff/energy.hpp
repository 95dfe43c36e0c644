// The nonlocal energy family J_rho, its L2 gradient, and the Hessian
// action including the rank-one coupling introduced by the gradient-square
// coefficient.
#pragma once

#include <cmath>
#include <optional>

#include "kirchhoff/grid.hpp"

namespace kirchhoff {

struct ProblemParams {
    double a = 1.0;    // linear diffusion coefficient, > 0
    double b = 1.0;    // nonlocal coefficient, >= 0
    double c = 1.0;    // prescribed mass, > 0
    double p = 12.0;   // nonlinearity exponent
    double rho = 1.0;  // homotopy weight on the nonlinear term
    Grid grid;

    // Pipeline-entry validation. b = 0 is reserved for the vanishing-b
    // continuation target and is rejected elsewhere.
    void validate(bool allow_zero_b = false) const {
        require(a > 0.0, "params: a must be positive");
        require(allow_zero_b ? b >= 0.0 : b > 0.0,
                allow_zero_b ? "params: b must be nonnegative" : "params: b must be positive");
        require(c > 0.0, "params: c must be positive");
        require(rho >= 0.5 && rho <= 1.0, "params: rho must lie in [1/2, 1]");
        const double lower = 2.0 + 8.0 / static_cast<double>(grid.dim);
        require(p > lower, "params: p must exceed 2 + 8/dim");
    }

    ProblemParams with(double new_b, double new_c, double new_rho) const {
        ProblemParams q = *this;
        q.b = new_b;
        q.c = new_c;
        q.rho = new_rho;
        return q;
    }
};

struct EnergyReport {
    double e = 0.0;     // integral of |grad u|^2
    double J = 0.0;     // full energy (rho = 1)
    double Jrho = 0.0;  // homotopy energy
    double lp = 0.0;    // integral of |u|^p
};

inline EnergyReport energy(const ProblemParams& params, const Field& u) {
    check_same_grid(params.grid, u.grid, "energy");
    EnergyReport r;
    r.e = grad_norm_sq(params.grid, u);
    r.lp = lp_integral(params.grid, u, params.p);
    const double quad = 0.5 * params.a * r.e + 0.25 * params.b * r.e * r.e;
    r.J = quad - r.lp / params.p;
    r.Jrho = quad - params.rho * r.lp / params.p;
    return r;
}

inline double energy_value(const ProblemParams& params, const Field& u) {
    return energy(params, u).Jrho;
}

// sign(u)|u|^{p-1}, via powers of |u| so fractional p is safe at u = 0.
inline double odd_power(double u, double p_minus_1) {
    const double m = std::pow(std::abs(u), p_minus_1);
    return u >= 0.0 ? m : -m;
}

// L2 representation of J_rho'(u):  -(a + b e) lap(u) - rho |u|^{p-2} u.
// The nonlocal coefficient e is recomputed on every call.
inline Field gradient(const ProblemParams& params, const Field& u) {
    check_same_grid(params.grid, u.grid, "gradient");
    const double e = grad_norm_sq(params.grid, u);
    Field g = laplacian_apply(params.grid, u);
    const double coeff = -(params.a + params.b * e);
    const double pm1 = params.p - 1.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        g.values[i] = coeff * g.values[i] - params.rho * odd_power(u.values[i], pm1);
    return g;
}

// Hessian action
//   H_u v = -(a + b e) lap(v) - 2 b (grad u, grad v) lap(u) - rho (p-1)|u|^{p-2} v,
// with (grad u, grad v) evaluated as inner_l2(v, -lap u) so the middle
// rank-one term stays symmetric at the discrete level.
inline Field hessian_apply(const ProblemParams& params, const Field& u, const Field& v) {
    check_same_grid(params.grid, u.grid, "hessian_apply");
    check_same_grid(params.grid, v.grid, "hessian_apply");
    const Grid& g = params.grid;
    const double e = grad_norm_sq(g, u);
    const Field lap_u = laplacian_apply(g, u);
    Field out = laplacian_apply(g, v);
    double cross = 0.0;  // (grad u, grad v)
    {
        CompensatedSum s;
        for (std::size_t i = 0; i < v.size(); ++i) s.add(v.values[i] * lap_u.values[i]);
        cross = -s.value() * g.cell_volume();
    }
    const double coeff = -(params.a + params.b * e);
    const double rank1 = -2.0 * params.b * cross;
    const double pm2 = params.p - 2.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double pot = params.rho * (params.p - 1.0) * std::pow(std::abs(u.values[i]), pm2);
        out.values[i] = coeff * out.values[i] + rank1 * lap_u.values[i] - pot * v.values[i];
    }
    return out;
}

}  // namespace kirchhoff
