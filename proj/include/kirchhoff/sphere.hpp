// Operations on the fixed-mass constraint sphere: metric-projection
// retraction, tangent projection, the constrained gradient, and the
// second-order form of the constrained problem.
#pragma once

#include "kirchhoff/energy.hpp"

namespace kirchhoff {

// Rescales u to mass c. The retraction used everywhere.
inline Field normalize(const ProblemParams& params, const Field& u) {
    check_same_grid(params.grid, u.grid, "normalize");
    const double m = norm_l2_sq(params.grid, u);
    require(m > 0.0, "normalize: zero field");
    Field out = u;
    scale(out, std::sqrt(params.c / m));
    return out;
}

inline void check_on_sphere(const ProblemParams& params, const Field& u, const char* op,
                            double rel_tol = 1e-8) {
    const double m = norm_l2_sq(params.grid, u);
    if (std::abs(m - params.c) > rel_tol * params.c)
        throw std::invalid_argument(std::string(op) + ": field is off the mass sphere (|m-c|/c = " +
                                    std::to_string(std::abs(m - params.c) / params.c) + ")");
}

// v minus its component along u. Requires u on the sphere.
inline Field project_tangent(const ProblemParams& params, const Field& u, const Field& v) {
    check_same_grid(params.grid, u.grid, "project_tangent");
    check_same_grid(params.grid, v.grid, "project_tangent");
    check_on_sphere(params, u, "project_tangent");
    const double coeff = inner_l2(params.grid, u, v) / params.c;
    Field out = v;
    axpy(out, -coeff, u);
    return out;
}

// Rayleigh estimate of the multiplier: at a critical point gradient(u) + lambda u = 0.
inline double multiplier_estimate(const ProblemParams& params, const Field& u, const Field& grad) {
    return -inner_l2(params.grid, u, grad) / params.c;
}

inline Field constrained_gradient(const ProblemParams& params, const Field& u) {
    const Field g = gradient(params, u);
    return project_tangent(params, u, g);
}

// Second-order form of the constrained problem on the tangent space:
//   <H_u v, v> + lambda_est <v, v>,
// the multiplier correction being exactly the -(phi'(u).u / c)(v,v) term.
inline double d2_form(const ProblemParams& params, const Field& u, const Field& v) {
    check_same_grid(params.grid, u.grid, "d2_form");
    check_same_grid(params.grid, v.grid, "d2_form");
    check_on_sphere(params, u, "d2_form");
    const double vnorm = norm_l2(params.grid, v);
    if (vnorm == 0.0) return 0.0;
    const double ortho = std::abs(inner_l2(params.grid, u, v));
    if (ortho > 1e-6 * vnorm * std::sqrt(params.c))
        throw std::invalid_argument("d2_form: v is not tangent at u");
    const Field g = gradient(params, u);
    const double lambda_est = multiplier_estimate(params, u, g);
    const Field hv = hessian_apply(params, u, v);
    return inner_l2(params.grid, hv, v) + lambda_est * norm_l2_sq(params.grid, v);
}

}  // namespace kirchhoff
