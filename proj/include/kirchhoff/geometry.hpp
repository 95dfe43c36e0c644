// Mountain-pass geometry: an empirical Gagliardo-Nirenberg constant, the
// admissible-mass threshold and separation level, the two path endpoints
// (a dilated first eigenfunction and a concentrated bump), and the initial
// normalized-interpolation path between them.
#pragma once

#include <map>
#include <string>

#include "kirchhoff/spectral.hpp"

namespace kirchhoff {

struct GNEstimate {
    double Cp = 0.0;          // empirical max ratio times a 2x safety factor
    double theta_mass = 0.0;  // exponent on the mass integral
    double theta_grad = 0.0;  // exponent on the gradient integral
    double max_ratio = 0.0;
    int trials = 0;
    std::map<std::string, double> family_max;  // reported per trial family
};

struct PathState {
    std::vector<Field> samples;    // on the mass sphere, endpoints fixed
    std::vector<double> energies;  // J_rho per sample
    int argmax = 0;

    void refresh_argmax() {
        argmax = 0;
        for (std::size_t i = 1; i < energies.size(); ++i)
            if (energies[i] > energies[argmax]) argmax = static_cast<int>(i);
    }
};

struct GeometryCertificate {
    double lambda1 = 0.0;
    Field phi1;
    double Cp = 0.0;
    double alpha0 = 0.0;
    double beta = 0.0;   // separation level is c*beta
    double cstar = 0.0;  // admissible mass threshold
    Field w1;
    Field w2;
    long k0 = 0;                  // bump concentration scale
    std::array<double, 2> x1{};   // bump center
    double boundary_inf = 0.0;    // sampled inf of J on the gradient sphere
    int boundary_samples = 0;
    // strictness margins, all positive when certified
    double margin_alpha0 = 0.0;        // alpha0 - 4 lambda1
    double margin_w1 = 0.0;            // c beta/2 - J(w1)
    double margin_w2_grad = 0.0;       // grad(w2)^2 - 2 c alpha0
    double margin_w2_energy = 0.0;     // -J_{1/2}(w2)
    double margin_boundary_inf = 0.0;  // sampled inf - c beta
    std::vector<std::string> violations;  // nonempty only in exploratory mode

    double cbeta(double c) const { return c * beta; }
};

namespace trial {

inline Field gaussian_bump(const Grid& g, std::array<double, 2> center, double width) {
    Field u(g);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const auto xy = g.node_coords(i);
        double r2 = (xy[0] - center[0]) * (xy[0] - center[0]);
        if (g.dim == 2) r2 += (xy[1] - center[1]) * (xy[1] - center[1]);
        u.values[i] = std::exp(-0.5 * r2 / (width * width));
    }
    return u;
}

// C-infinity bump supported in the ball of the given radius.
inline Field mollifier_bump(const Grid& g, std::array<double, 2> center, double radius) {
    Field u(g);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const auto xy = g.node_coords(i);
        double r2 = (xy[0] - center[0]) * (xy[0] - center[0]);
        if (g.dim == 2) r2 += (xy[1] - center[1]) * (xy[1] - center[1]);
        const double s2 = r2 / (radius * radius);
        u.values[i] = s2 < 1.0 ? std::exp(-1.0 / (1.0 - s2)) : 0.0;
    }
    return u;
}

inline Field random_fourier(const Grid& g, Rng& rng, int modes) {
    Field u(g);
    if (g.dim == 1) {
        const int jmax = std::min(modes, g.n[0] / 4);
        std::vector<double> coef(static_cast<std::size_t>(jmax));
        for (int j = 0; j < jmax; ++j)
            coef[static_cast<std::size_t>(j)] = rng.normal() / std::pow(j + 1.0, 1.2);
        const double k = 3.14159265358979323846 / g.extent[0];
        for (int i = 0; i < g.n[0]; ++i) {
            const double x = g.coord(0, i);
            double s = 0.0;
            for (int j = 0; j < jmax; ++j) s += coef[static_cast<std::size_t>(j)] * std::sin((j + 1) * k * x);
            u.values[static_cast<std::size_t>(i)] = s;
        }
    } else {
        const int jmax = std::min(modes, std::min(g.n[0], g.n[1]) / 4);
        const double kx = 3.14159265358979323846 / g.extent[0];
        const double ky = 3.14159265358979323846 / g.extent[1];
        std::vector<double> coef(static_cast<std::size_t>(jmax) * jmax);
        for (auto& c : coef) c = rng.normal();
        for (std::size_t idx = 0; idx < coef.size(); ++idx) {
            const int j = static_cast<int>(idx) % jmax + 1;
            const int l = static_cast<int>(idx) / jmax + 1;
            coef[idx] /= std::pow(static_cast<double>(j) * l, 1.2);
        }
        for (std::size_t i = 0; i < u.size(); ++i) {
            const auto xy = g.node_coords(i);
            double s = 0.0;
            for (int j = 1; j <= jmax; ++j)
                for (int l = 1; l <= jmax; ++l)
                    s += coef[static_cast<std::size_t>(l - 1) * jmax + (j - 1)] * std::sin(j * kx * xy[0]) *
                         std::sin(l * ky * xy[1]);
            u.values[i] = s;
        }
    }
    return u;
}

}  // namespace trial

namespace detail {

// Generates the shared trial-field families; index selects deterministically.
inline Field gn_trial_field(const ProblemParams& params, const Field& phi1, std::size_t index, Rng rng) {
    const Grid& g = params.grid;
    const double lmin = g.dim == 1 ? g.extent[0] : std::min(g.extent[0], g.extent[1]);
    const double hmax = g.dim == 1 ? g.h[0] : std::max(g.h[0], g.h[1]);
    const auto kind = index % 4;
    if (kind == 0) {
        // bumps with widths spanning two decades
        const double wlo = std::max(3.0 * hmax, lmin / 600.0);
        const double whi = lmin / 6.0;
        const double t = rng.uniform();
        const double width = wlo * std::pow(whi / wlo, t);
        std::array<double, 2> cen{};
        for (int ax = 0; ax < g.dim; ++ax)
            cen[ax] = g.extent[ax] * rng.uniform(0.25, 0.75);
        return trial::gaussian_bump(g, cen, width);
    }
    if (kind == 1) {
        // powers of the first eigenfunction
        static const double powers[] = {1.0, 1.5, 2.0, 3.0, 4.0, 6.0};
        const double m = powers[(index / 4) % 6];
        Field u(g);
        for (std::size_t i = 0; i < u.size(); ++i)
            u.values[i] = std::pow(std::max(0.0, phi1.values[i]), m);
        return u;
    }
    if (kind == 2) return trial::random_fourier(g, rng, 64);
    const double wlo = std::max(3.0 * hmax, lmin / 400.0);
    const double whi = lmin / 4.0;
    const double width = wlo * std::pow(whi / wlo, rng.uniform());
    std::array<double, 2> cen{};
    for (int ax = 0; ax < g.dim; ++ax) cen[ax] = g.extent[ax] * rng.uniform(0.3, 0.7);
    return trial::mollifier_bump(g, cen, width);
}

}  // namespace detail

// Empirical estimate of the interpolation constant in
//   int |u|^p <= Cp (int u^2)^{theta_mass} (int |grad u|^2)^{theta_grad}.
// The returned Cp doubles the largest observed ratio; the certificate only
// needs a valid upper bound, so the safety factor absorbs families the
// sweep did not visit.
inline GNEstimate estimate_gn_constant(const ProblemParams& params, const Field& phi1,
                                       std::uint64_t seed, int trials = 200, int nthreads = 1) {
    require(trials >= 200, "estimate_gn_constant: needs at least 200 trials");
    const Grid& g = params.grid;
    const double N = static_cast<double>(g.dim);
    GNEstimate est;
    est.theta_mass = (2.0 * N - params.p * (N - 2.0)) / 4.0;
    est.theta_grad = N * (params.p - 2.0) / 4.0;
    est.trials = trials;

    Rng root(seed);
    std::vector<Rng> streams;
    streams.reserve(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) streams.push_back(root.child(static_cast<std::uint64_t>(t)));

    std::vector<double> ratios(static_cast<std::size_t>(trials), 0.0);
    parallel_for(static_cast<std::size_t>(trials), nthreads, [&](std::size_t t) {
        Field u = detail::gn_trial_field(params, phi1, t, streams[t]);
        const double mass = norm_l2_sq(g, u);
        if (mass <= 0.0) return;
        const double e = grad_norm_sq(g, u);
        const double lp = lp_integral(g, u, params.p);
        ratios[t] = lp / (std::pow(mass, est.theta_mass) * std::pow(e, est.theta_grad));
    });
    static const char* names[] = {"gauss_bump", "eigen_power", "fourier", "mollifier"};
    for (int t = 0; t < trials; ++t) {
        const double r = ratios[static_cast<std::size_t>(t)];
        est.max_ratio = std::max(est.max_ratio, r);
        auto& fam = est.family_max[names[t % 4]];
        fam = std::max(fam, r);
    }
    require(est.max_ratio > 0.0, "estimate_gn_constant: all trials degenerate");
    est.Cp = 2.0 * est.max_ratio;
    return est;
}

struct CertifyOptions {
    bool enforce = true;  // throw on violated inequalities (false = exploratory)
    int gn_trials = 200;
    int boundary_samples = 100;
    int nthreads = 1;
    std::uint64_t seed = 1;
};

// Mass-independent part of the certificate: first eigenpair, interpolation
// constant, and the admissible-mass threshold.
struct GeometryBase {
    double lambda1 = 0.0;
    Field phi1;
    GNEstimate gn;
    double cstar = 0.0;
};

inline GeometryBase geometry_base(const ProblemParams& params, const CertifyOptions& opts) {
    const Grid& g = params.grid;
    const double N = static_cast<double>(g.dim);
    const double mexp = N * (params.p - 2.0) - 4.0;
    require(mexp > 0.0, "geometry_base: exponent outside the supercritical range");
    GeometryBase base;
    auto eigs = dirichlet_eigs(g, 1);
    base.lambda1 = eigs[0].value;
    base.phi1 = eigs[0].vector;
    base.gn = estimate_gn_constant(params, base.phi1, opts.seed, opts.gn_trials, opts.nthreads);
    const double ratio = params.a * params.p / (2.0 * base.gn.Cp);
    base.cstar = std::pow(8.0 * base.lambda1, mexp / (2.0 * (2.0 - params.p))) *
                 std::pow(ratio, 2.0 / (params.p - 2.0));
    return base;
}

namespace detail {

// Dilated first eigenfunction: sqrt(c) (alpha/lambda1)^{N/4} phi1 at
// center-scaled coordinates, then an exact mass renormalization.
inline Field scaled_eigenfunction(const ProblemParams& params, const Field& phi1, double lambda1,
                                  double alpha) {
    const Grid& g = params.grid;
    const double s = std::sqrt(alpha / lambda1);
    const auto cen = g.center();
    Field u(g);
    const double amp = std::sqrt(params.c) * std::pow(s, 0.5 * g.dim);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const auto xy = g.node_coords(i);
        const double px = cen[0] + s * (xy[0] - cen[0]);
        const double py = g.dim == 2 ? cen[1] + s * (xy[1] - cen[1]) : 0.0;
        u.values[i] = amp * field_interpolate(phi1, px, py);
    }
    return normalize(params, u);
}

// Moves a mass-c field along the normalized segment toward the anchor until
// the gradient integral hits the target; the endpoints bracket the target.
inline Field bisect_to_gradient_level(const ProblemParams& params, const Field& from,
                                      const Field& anchor, double target) {
    const Grid& g = params.grid;
    auto blend = [&](double t) {
        Field mix = lin_comb(1.0 - t, from, t, anchor);
        if (norm_l2_sq(g, mix) < 1e-14 * params.c) {
            // degenerate cancellation; nudge off the singular parameter
            mix = lin_comb(1.0 - t - 1e-9, from, t + 1e-9, anchor);
        }
        return normalize(params, mix);
    };
    double lo = 0.0, hi = 1.0;
    double f_lo = grad_norm_sq(g, from) - target;
    Field best = from;
    for (int it = 0; it < 70; ++it) {
        const double mid = 0.5 * (lo + hi);
        best = blend(mid);
        const double fm = grad_norm_sq(g, best) - target;
        if (std::abs(fm) <= 1e-9 * target) break;
        if ((fm > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    return best;
}

}  // namespace detail

inline GeometryCertificate certify_geometry(const ProblemParams& params, const CertifyOptions& opts,
                                            const GeometryBase& base) {
    params.validate(true);
    const Grid& g = params.grid;
    const double N = static_cast<double>(g.dim);
    const double mexp = N * (params.p - 2.0) - 4.0;  // positive in the supercritical range
    require(mexp > 0.0, "certify_geometry: exponent outside the supercritical range");

    GeometryCertificate cert;
    cert.lambda1 = base.lambda1;
    cert.phi1 = base.phi1;
    cert.Cp = base.gn.Cp;
    cert.cstar = base.cstar;
    if (params.c > cert.cstar) {
        if (opts.enforce) throw GeometryNotCertifiedError(cert.cstar, params.c);
        cert.violations.push_back("c_le_cstar");
    }
    const double ratio = params.a * params.p / (2.0 * cert.Cp);
    cert.alpha0 = 0.5 * std::pow(ratio, 4.0 / mexp) * std::pow(params.c, 2.0 * (2.0 - params.p) / mexp);
    cert.beta = 0.25 * params.a * cert.alpha0 + 0.25 * params.b * params.c * cert.alpha0 * cert.alpha0;
    const double cbeta = params.c * cert.beta;

    cert.margin_alpha0 = cert.alpha0 - 4.0 * cert.lambda1;
    if (cert.margin_alpha0 < 0.0) {
        if (opts.enforce) throw CertificateViolationError("alpha0 >= 4 lambda1");
        cert.violations.push_back("alpha0_ge_4lambda1");
    }

    // endpoint w1: the eigenfunction dilated to gradient level c*alpha0/4
    cert.w1 = detail::scaled_eigenfunction(params, cert.phi1, cert.lambda1, 0.25 * cert.alpha0);
    const double J_w1 = energy(params, cert.w1).J;
    cert.margin_w1 = 0.5 * cbeta - J_w1;
    if (cert.margin_w1 <= 0.0) {
        if (opts.enforce) throw CertificateViolationError("J(w1) <= c beta / 2");
        cert.violations.push_back("J_w1_le_half_cbeta");
    }

    // endpoint w2: concentrated bump, scale doubled until it clears both
    // separation inequalities
    cert.x1 = g.center();
    const double half_min = 0.5 * (g.dim == 1 ? g.extent[0] : std::min(g.extent[0], g.extent[1]));
    const double hmax = g.dim == 1 ? g.h[0] : std::max(g.h[0], g.h[1]);
    long k = static_cast<long>(std::ceil(1.0 / (0.9 * half_min)));
    if (k < 1) k = 1;
    bool w2_ok = false;
    ProblemParams params_half = params;
    params_half.rho = 0.5;
    while (true) {
        const double radius = 1.0 / static_cast<double>(k);
        if (radius < 3.0 * hmax) break;  // grid can no longer represent the bump
        Field cand = trial::mollifier_bump(g, cert.x1, radius);
        const double mass = norm_l2_sq(g, cand);
        if (mass > 0.0) {
            cand = normalize(params, cand);
            const double e2 = grad_norm_sq(g, cand);
            const double Jhalf = energy(params_half, cand).Jrho;
            if (e2 > 2.0 * params.c * cert.alpha0 && Jhalf < 0.0) {
                cert.w2 = cand;
                cert.k0 = k;
                cert.margin_w2_grad = e2 - 2.0 * params.c * cert.alpha0;
                cert.margin_w2_energy = -Jhalf;
                w2_ok = true;
                break;
            }
        }
        k *= 2;
    }
    if (!w2_ok) {
        if (opts.enforce)
            throw CertificateViolationError(
                "w2 construction: grid resolution exhausted before J_{1/2}(w2) < 0 and "
                "grad(w2)^2 > 2 c alpha0; refine the grid");
        cert.violations.push_back("w2_construction");
        cert.w2 = normalize(params, trial::mollifier_bump(g, cert.x1, std::max(3.0 * hmax, 1.0 / static_cast<double>(std::max(1L, k / 2)))));
        cert.k0 = k;
    }

    // sampled infimum of J over the sphere slice grad^2 = c*alpha0
    const double target = params.c * cert.alpha0;
    Field anchor_low = normalize(params, cert.phi1);
    Rng root(opts.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<Rng> streams;
    for (int s = 0; s < opts.boundary_samples; ++s)
        streams.push_back(root.child(static_cast<std::uint64_t>(s)));
    std::vector<double> sampled(static_cast<std::size_t>(opts.boundary_samples), 0.0);
    parallel_for(static_cast<std::size_t>(opts.boundary_samples), opts.nthreads, [&](std::size_t s) {
        Field v = detail::gn_trial_field(params, cert.phi1, s, streams[s]);
        Field z = normalize(params, v);
        const double ez = grad_norm_sq(g, z);
        Field on_slice = (ez > target) ? detail::bisect_to_gradient_level(params, z, anchor_low, target)
                                       : detail::bisect_to_gradient_level(params, z, cert.w2, target);
        sampled[s] = energy(params, on_slice).J;
    });
    cert.boundary_inf = sampled[0];
    for (double v : sampled) cert.boundary_inf = std::min(cert.boundary_inf, v);
    cert.boundary_samples = opts.boundary_samples;
    cert.margin_boundary_inf = cert.boundary_inf - cbeta;
    if (cert.margin_boundary_inf < 0.0) {
        if (opts.enforce) throw CertificateViolationError("inf_{dB} J >= c beta");
        cert.violations.push_back("boundary_inf_ge_cbeta");
    }
    return cert;
}

inline GeometryCertificate certify_geometry(const ProblemParams& params, const CertifyOptions& opts) {
    return certify_geometry(params, opts, geometry_base(params, opts));
}

// Normalized linear interpolation between the certificate endpoints.
inline PathState initial_path(const ProblemParams& params, const GeometryCertificate& cert, int m) {
    require(m >= 17, "initial_path: need at least 17 samples");
    PathState path;
    path.samples.reserve(static_cast<std::size_t>(m));
    path.energies.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(m - 1);
        Field mix = lin_comb(1.0 - t, cert.w1, t, cert.w2);
        require(norm_l2_sq(params.grid, mix) > 1e-14 * params.c,
                "initial_path: degenerate interpolation sample");
        path.samples.push_back(normalize(params, mix));
        path.energies.push_back(energy(params, path.samples.back()).Jrho);
    }
    path.refresh_argmax();
    return path;
}

}  // namespace kirchhoff
