// Dirichlet-Laplacian eigenpairs via matrix-free Lanczos on the inverse
// operator, and the Morse index of the constrained second-order form,
// counted against an H1-type comparison norm.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <optional>
#include <vector>

#include "kirchhoff/krylov.hpp"
#include "kirchhoff/sphere.hpp"

namespace kirchhoff {

struct EigenPair {
    double value = 0.0;
    Field vector;  // unit L2 norm
};

namespace detail {

// Symmetric Lanczos with full reorthogonalization in the inner product
// implied by the cached metric images (metric_images[j] = B q_j; for the
// plain case the image is q_j itself).
struct LanczosState {
    std::vector<Vec> q;        // basis, metric-orthonormal
    std::vector<Vec> bq;       // metric images of the basis
    std::vector<double> alpha;
    std::vector<double> beta;  // beta[j] links q_j and q_{j+1}
};

inline void lanczos_reorthogonalize(LanczosState& st, Vec& w) {
    for (int pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i < st.q.size(); ++i) vaxpy(w, -vdot(w, st.bq[i]), st.q[i]);
}

// Ritz decomposition of the current tridiagonal matrix. Returns ascending
// eigenvalues and the last-row components used for residual estimates.
struct RitzData {
    std::vector<double> values;
    Eigen::MatrixXd vectors;  // columns
    std::vector<double> last_row;
};

inline RitzData ritz_of_tridiag(const std::vector<double>& alpha, const std::vector<double>& beta) {
    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        T(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    RitzData out;
    out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + m);
    out.vectors = es.eigenvectors();
    out.last_row.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) out.last_row[static_cast<std::size_t>(i)] = es.eigenvectors()(m - 1, i);
    return out;
}

inline Vec assemble_ritz_vector(const std::vector<Vec>& basis, const Eigen::MatrixXd& vectors, int col) {
    Vec v(basis[0].size(), 0.0);
    for (std::size_t j = 0; j < basis.size(); ++j) vaxpy(v, vectors(static_cast<int>(j), col), basis[j]);
    return v;
}

inline Vec deterministic_start(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Vec v(n);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

}  // namespace detail

// k lowest eigenpairs of -lap on g. The Lanczos recurrence runs on the
// inverse operator (exact tridiagonal solve in 1d, tight CG in 2d), so the
// wanted end of the spectrum converges in a few dozen steps; converged
// pairs are deflated and the sweep restarts until k pairs are found.
inline std::vector<EigenPair> dirichlet_eigs(const Grid& g, int k, int max_steps = 320) {
    require(k >= 1 && k <= 10, "dirichlet_eigs: k must be in [1,10]");
    const std::size_t n = g.size();
    require(static_cast<std::size_t>(k) < n, "dirichlet_eigs: grid too small for k pairs");

    ShiftedLaplacianSolver inv(g, 1.0, 0.0, 1e-13, 40000);
    auto apply_neg_lap = [&](const Vec& v) {
        Field f(g, v);
        Field lap = laplacian_apply(g, f);
        Vec out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = -lap.values[i];
        return out;
    };

    std::vector<EigenPair> found;
    auto deflate = [&](Vec& v) {
        for (const auto& ep : found) vaxpy(v, -vdot(v, ep.vector.values), ep.vector.values);
    };

    int round = 0;
    while (static_cast<int>(found.size()) < k && round < 8) {
        detail::LanczosState st;
        Vec q0 = detail::deterministic_start(n, 0x5eed0 + static_cast<std::uint64_t>(round));
        deflate(q0);
        vscale(q0, 1.0 / vnorm(q0));
        st.q.push_back(q0);
        st.bq.push_back(q0);

        const int m_max = std::min<int>(max_steps, static_cast<int>(n) - 1);
        std::vector<std::pair<double, Vec>> accepted;
        for (int j = 0; j < m_max; ++j) {
            Vec w = inv.solve(st.q[static_cast<std::size_t>(j)]);
            deflate(w);
            const double a = vdot(w, st.q[static_cast<std::size_t>(j)]);
            st.alpha.push_back(a);
            vaxpy(w, -a, st.q[static_cast<std::size_t>(j)]);
            if (j > 0) vaxpy(w, -st.beta.back(), st.q[static_cast<std::size_t>(j) - 1]);
            detail::lanczos_reorthogonalize(st, w);
            const double b = vnorm(w);

            const bool last = (j + 1 == m_max) || b < 1e-14;
            if ((j + 1) % 10 == 0 || last) {
                auto ritz = detail::ritz_of_tridiag(st.alpha, st.beta);
                accepted.clear();
                // largest Ritz values of the inverse are the lowest of -lap
                for (int idx = static_cast<int>(ritz.values.size()) - 1; idx >= 0; --idx) {
                    const double theta = ritz.values[static_cast<std::size_t>(idx)];
                    if (theta <= 0.0) break;
                    const double mu = 1.0 / theta;
                    Vec v = detail::assemble_ritz_vector(st.q, ritz.vectors, idx);
                    deflate(v);
                    const double vn = vnorm(v);
                    if (vn < 0.5) continue;  // collapsed onto deflated space
                    vscale(v, 1.0 / vn);
                    Vec av = apply_neg_lap(v);
                    vaxpy(av, -mu, v);
                    if (vnorm(av) <= 1e-9 * mu) {
                        accepted.emplace_back(mu, std::move(v));
                        if (static_cast<int>(found.size() + accepted.size()) >= k) break;
                    } else {
                        break;  // wait for more steps before walking further in
                    }
                }
                if (static_cast<int>(found.size() + accepted.size()) >= k || last) break;
            }
            if (b < 1e-14) break;
            Vec qn = w;
            vscale(qn, 1.0 / b);
            st.beta.push_back(b);
            st.q.push_back(qn);
            st.bq.push_back(std::move(qn));
        }
        for (auto& [mu, v] : accepted) {
            // orthogonalize against previously found pairs and L2-normalize
            deflate(v);
            Field vec(g, std::move(v));
            const double nrm = norm_l2(g, vec);
            scale(vec, 1.0 / nrm);
            CompensatedSum mean;
            for (double x : vec.values) mean.add(x);
            if (mean.value() < 0.0) scale(vec, -1.0);
            found.push_back({mu, std::move(vec)});
            if (static_cast<int>(found.size()) >= k) break;
        }
        ++round;
    }
    if (static_cast<int>(found.size()) < k)
        throw ConvergenceError("dirichlet_eigs: Lanczos failed to converge " + std::to_string(k) +
                               " pairs");
    std::sort(found.begin(), found.end(),
              [](const EigenPair& x, const EigenPair& y) { return x.value < y.value; });
    found.resize(static_cast<std::size_t>(k));
    return found;
}

struct MorseReport {
    int index = 0;
    double theta = 0.0;
    std::vector<double> eigenvalues;  // lowest converged values of the projected pencil
    std::vector<Field> eigenvectors;  // matching tangent directions (not serialized)
};

// Morse index of the constrained second-order form at (u, lambda): counts
// directions v in the tangent space with
//   <H_u v, v> + lambda <v, v>  <  -theta (<v,v> + <grad v, grad v>).
// Solved as a generalized eigenproblem for the pencil (P(H+lambda)P, P(I-lap)P)
// by Lanczos in the metric of the right-hand operator.
inline MorseReport morse_index_form(const ProblemParams& params, const Field& u, double lambda,
                                    double theta, int want = 6, int max_steps = 240) {
    require(theta >= 0.0, "morse_index: theta must be nonnegative");
    check_on_sphere(params, u, "morse_index");
    const Grid& g = params.grid;
    const std::size_t n = g.size();
    const double cellw = g.cell_volume();

    const Vec& uv = u.values;
    const double umass = vdot(uv, uv);  // mass/cellw
    auto project = [&](Vec& v) {
        const double coef = vdot(v, uv) / umass;
        vaxpy(v, -coef, uv);
    };

    const double e = grad_norm_sq(g, u);
    const Field lap_u = laplacian_apply(g, u);
    const double pm2 = params.p - 2.0;
    Vec potential(n);
    for (std::size_t i = 0; i < n; ++i)
        potential[i] = params.rho * (params.p - 1.0) * std::pow(std::abs(uv[i]), pm2);

    // A v = P (H_u v + lambda v); the rank-one term reuses lap_u.
    auto apply_A = [&](const Vec& v) {
        Field fv(g, v);
        Field lap_v = laplacian_apply(g, fv);
        double cross = -cellw * vdot(v, lap_u.values);
        const double coeff = params.a + params.b * e;
        Vec out(n);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = -coeff * lap_v.values[i] - 2.0 * params.b * cross * lap_u.values[i] -
                     potential[i] * v[i] + lambda * v[i];
        project(out);
        return out;
    };

    ShiftedLaplacianSolver metric(g, 1.0, 1.0, 1e-12, 40000);
    auto apply_B = [&](const Vec& v) {
        Vec out = metric.apply(v);
        project(out);
        return out;
    };
    LinOp binv_prec = [&](const Vec& v) {
        Vec out = metric.solve(v);
        project(out);
        return out;
    };
    auto solve_B = [&](const Vec& rhs) {
        Vec x;
        LinOp A = [&](const Vec& v) {
            Vec vv = v;
            project(vv);
            return apply_B(vv);
        };
        IterStats stats = pcg(A, rhs, x, binv_prec, 1e-11, 1000);
        if (!stats.converged) throw ConvergenceError("morse_index: metric solve stalled");
        project(x);
        return x;
    };

    detail::LanczosState st;
    Vec q0 = detail::deterministic_start(n, 0x6d6f7273UL);
    project(q0);
    Vec bq0 = apply_B(q0);
    double q0n = std::sqrt(vdot(q0, bq0));
    vscale(q0, 1.0 / q0n);
    vscale(bq0, 1.0 / q0n);
    st.q.push_back(q0);
    st.bq.push_back(bq0);

    const int m_max = std::min<int>(max_steps, static_cast<int>(n) - 2);
    const double conv_scale = std::max({1.0, std::abs(lambda), params.a + params.b * e});
    std::vector<double> low_values;
    std::vector<Vec> low_vectors;

    for (int j = 0; j < m_max; ++j) {
        Vec z = apply_A(st.q[static_cast<std::size_t>(j)]);
        const double a = vdot(z, st.q[static_cast<std::size_t>(j)]);
        st.alpha.push_back(a);
        Vec w = solve_B(z);
        vaxpy(w, -a, st.q[static_cast<std::size_t>(j)]);
        if (j > 0) vaxpy(w, -st.beta.back(), st.q[static_cast<std::size_t>(j) - 1]);
        detail::lanczos_reorthogonalize(st, w);
        Vec bw = apply_B(w);
        const double b = std::sqrt(std::max(0.0, vdot(w, bw)));

        const bool last = (j + 1 == m_max) || b < 1e-13;
        if ((j + 1) % 12 == 0 || last) {
            auto ritz = detail::ritz_of_tridiag(st.alpha, st.beta);
            low_values.clear();
            low_vectors.clear();
            bool all_converged = true;
            const int take = std::min<int>(want, static_cast<int>(ritz.values.size()));
            for (int i = 0; i < take; ++i) {
                const double resid = (i < static_cast<int>(ritz.values.size()) && !st.beta.empty())
                                         ? std::abs(st.beta.back() * ritz.last_row[static_cast<std::size_t>(i)])
                                         : 0.0;
                if (resid > 1e-7 * conv_scale) {
                    all_converged = false;
                    break;
                }
                low_values.push_back(ritz.values[static_cast<std::size_t>(i)]);
                low_vectors.push_back(detail::assemble_ritz_vector(st.q, ritz.vectors, i));
            }
            if ((all_converged && static_cast<int>(low_values.size()) == take) || last) break;
        }
        if (b < 1e-13) break;
        Vec qn = w;
        vscale(qn, 1.0 / b);
        vscale(bw, 1.0 / b);
        st.beta.push_back(b);
        st.q.push_back(std::move(qn));
        st.bq.push_back(std::move(bw));
    }
    if (low_values.empty()) throw ConvergenceError("morse_index: Lanczos produced no converged values");

    MorseReport rep;
    rep.theta = theta;
    rep.eigenvalues = low_values;
    for (auto& v : low_vectors) {
        Field f(g, std::move(v));
        const double nrm = norm_l2(g, f);
        if (nrm > 0.0) scale(f, 1.0 / nrm);
        rep.eigenvectors.push_back(std::move(f));
    }
    for (double mu : low_values)
        if (mu < -theta) ++rep.index;
    return rep;
}

}  // namespace kirchhoff
