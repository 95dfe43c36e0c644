// Matrix-free linear algebra kernels: a constant-coefficient tridiagonal
// solve, preconditioned CG, flexible GMRES, and a shifted-screened-Laplacian
// solver used as the metric and as a preconditioner throughout.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "kirchhoff/grid.hpp"

namespace kirchhoff {

using Vec = std::vector<double>;
using LinOp = std::function<Vec(const Vec&)>;

inline double vdot(const Vec& a, const Vec& b) {
    CompensatedSum s;
    for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
    return s.value();
}
inline double vnorm(const Vec& a) { return std::sqrt(vdot(a, a)); }
inline void vaxpy(Vec& y, double alpha, const Vec& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}
inline void vscale(Vec& y, double alpha) {
    for (double& v : y) v *= alpha;
}

// Thomas algorithm for a symmetric constant-coefficient tridiagonal matrix
// diag(d) + off-diagonal o. Factorization is reused across solves.
class TridiagSolver {
public:
    TridiagSolver() = default;
    TridiagSolver(std::size_t n, double diag, double off) { init(n, diag, off); }

    void init(std::size_t n, double diag, double off) {
        off_ = off;
        inv_m_.resize(n);
        cprime_.resize(n);
        double prev_c = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double m = diag - off * prev_c;
            inv_m_[i] = 1.0 / m;
            prev_c = off * inv_m_[i];
            cprime_[i] = prev_c;
        }
    }

    Vec solve(const Vec& rhs) const {
        const std::size_t n = rhs.size();
        Vec x(n);
        double prev = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            prev = (rhs[i] - off_ * prev) * inv_m_[i];
            x[i] = prev;
        }
        for (std::size_t i = n - 1; i-- > 0;) x[i] -= cprime_[i] * x[i + 1];
        return x;
    }

private:
    double off_ = 0.0;
    Vec inv_m_;
    Vec cprime_;
};

struct IterStats {
    int iters = 0;
    double relres = 0.0;
    bool converged = false;
};

// Preconditioned conjugate gradients; M may be empty.
inline IterStats pcg(const LinOp& A, const Vec& b, Vec& x, const LinOp& M, double tol, int maxit) {
    IterStats st;
    const double bnorm = vnorm(b);
    if (bnorm == 0.0) {
        x.assign(b.size(), 0.0);
        st.converged = true;
        return st;
    }
    if (x.size() != b.size()) x.assign(b.size(), 0.0);
    Vec r = b;
    {
        Vec ax = A(x);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= ax[i];
    }
    Vec z = M ? M(r) : r;
    Vec p = z;
    double rz = vdot(r, z);
    for (int it = 0; it < maxit; ++it) {
        st.relres = vnorm(r) / bnorm;
        if (st.relres <= tol) {
            st.converged = true;
            st.iters = it;
            return st;
        }
        Vec ap = A(p);
        const double pap = vdot(p, ap);
        if (pap <= 0.0) break;  // operator not SPD along p; bail out
        const double alpha = rz / pap;
        vaxpy(x, alpha, p);
        vaxpy(r, -alpha, ap);
        z = M ? M(r) : r;
        const double rz_new = vdot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
    }
    st.relres = vnorm(r) / bnorm;
    st.iters = maxit;
    st.converged = st.relres <= tol;
    return st;
}

// Right-preconditioned flexible GMRES with restarts. The flexible variant
// tolerates inexact (inner-iterative) preconditioners.
inline IterStats fgmres(const LinOp& A, const Vec& b, Vec& x, const LinOp& Mright, double tol,
                        int restart, int maxit) {
    IterStats st;
    const std::size_t n = b.size();
    const double bnorm = vnorm(b);
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        st.converged = true;
        return st;
    }
    if (x.size() != n) x.assign(n, 0.0);
    int total_iters = 0;
    while (total_iters < maxit) {
        Vec r = b;
        {
            Vec ax = A(x);
            for (std::size_t i = 0; i < n; ++i) r[i] -= ax[i];
        }
        double beta = vnorm(r);
        st.relres = beta / bnorm;
        if (st.relres <= tol) {
            st.converged = true;
            st.iters = total_iters;
            return st;
        }
        const int m = restart;
        std::vector<Vec> V;
        std::vector<Vec> Z;
        V.reserve(static_cast<std::size_t>(m) + 1);
        Z.reserve(static_cast<std::size_t>(m));
        V.push_back(r);
        vscale(V[0], 1.0 / beta);
        std::vector<double> H(static_cast<std::size_t>(m + 1) * m, 0.0);
        auto h = [&](int i, int j) -> double& { return H[static_cast<std::size_t>(j) * (m + 1) + i]; };
        std::vector<double> cs(m), sn(m), g(static_cast<std::size_t>(m) + 1, 0.0);
        g[0] = beta;
        int k = 0;
        for (; k < m && total_iters < maxit; ++k, ++total_iters) {
            Z.push_back(Mright ? Mright(V[k]) : V[k]);
            Vec w = A(Z[k]);
            // modified Gram-Schmidt with one reorthogonalization pass
            for (int pass = 0; pass < 2; ++pass) {
                for (int i = 0; i <= k; ++i) {
                    const double hik = vdot(w, V[i]);
                    if (pass == 0)
                        h(i, k) = hik;
                    else
                        h(i, k) += hik;
                    vaxpy(w, -hik, V[i]);
                }
            }
            h(k + 1, k) = vnorm(w);
            if (h(k + 1, k) > 0.0) {
                V.push_back(w);
                vscale(V[k + 1], 1.0 / h(k + 1, k));
            }
            for (int i = 0; i < k; ++i) {
                const double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
                h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
                h(i, k) = t;
            }
            const double denom = std::hypot(h(k, k), h(k + 1, k));
            if (denom == 0.0) {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = h(k, k) / denom;
                sn[k] = h(k + 1, k) / denom;
            }
            h(k, k) = cs[k] * h(k, k) + sn[k] * h(k + 1, k);
            h(k + 1, k) = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            st.relres = std::abs(g[k + 1]) / bnorm;
            if (st.relres <= tol) {
                ++k;
                break;
            }
            if (h(k, k) == 0.0 && std::abs(g[k + 1]) > 0.0) break;  // breakdown
        }
        // back substitution and update
        std::vector<double> y(k, 0.0);
        for (int i = k - 1; i >= 0; --i) {
            double s = g[i];
            for (int j = i + 1; j < k; ++j) s -= h(i, j) * y[j];
            y[i] = h(i, i) != 0.0 ? s / h(i, i) : 0.0;
        }
        for (int j = 0; j < k; ++j) vaxpy(x, y[j], Z[j]);
        if (st.relres <= tol) {
            st.converged = true;
            st.iters = total_iters;
            return st;
        }
        if (k == 0) break;  // no progress possible
    }
    st.iters = total_iters;
    return st;
}

// Solver for K = sigma (-lap) + tau I with Dirichlet data: exact tridiagonal
// factorization in 1d, Jacobi-preconditioned CG in 2d.
class ShiftedLaplacianSolver {
public:
    ShiftedLaplacianSolver(const Grid& g, double sigma, double tau, double tol_2d = 1e-11,
                           int maxit_2d = 20000)
        : grid_(g), sigma_(sigma), tau_(tau), tol2d_(tol_2d), maxit2d_(maxit_2d) {
        if (grid_.dim == 1) {
            const double ih2 = 1.0 / (grid_.h[0] * grid_.h[0]);
            tri_.init(grid_.size(), 2.0 * sigma_ * ih2 + tau_, -sigma_ * ih2);
        } else {
            diag_ = 2.0 * sigma_ * (1.0 / (grid_.h[0] * grid_.h[0]) + 1.0 / (grid_.h[1] * grid_.h[1])) + tau_;
        }
    }

    Vec apply(const Vec& v) const {
        Field f(grid_, v);
        Field lap = laplacian_apply(grid_, f);
        Vec out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = -sigma_ * lap.values[i] + tau_ * v[i];
        return out;
    }

    Vec solve(const Vec& rhs) const {
        if (grid_.dim == 1) return tri_.solve(rhs);
        Vec x;
        LinOp A = [this](const Vec& v) { return apply(v); };
        LinOp M = [this](const Vec& v) {
            Vec out = v;
            vscale(out, 1.0 / diag_);
            return out;
        };
        pcg(A, rhs, x, M, tol2d_, maxit2d_);
        return x;
    }

    Field solve(const Field& rhs) const { return Field(grid_, solve(rhs.values)); }

private:
    Grid grid_;
    double sigma_ = 1.0;
    double tau_ = 0.0;
    double tol2d_;
    int maxit2d_;
    TridiagSolver tri_;
    double diag_ = 1.0;
};

}  // namespace kirchhoff
