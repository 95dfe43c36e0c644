// Uniform tensor grids on an interval or rectangle with homogeneous
// Dirichlet data, the centered-difference Laplacian, and the nodal
// quadrature that keeps summation by parts exact at the discrete level.
#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "kirchhoff/common.hpp"

namespace kirchhoff {

struct Grid {
    int dim = 1;                       // 1 or 2
    std::array<double, 2> extent{};    // physical side lengths
    std::array<int, 2> n{};            // interior node counts per axis
    std::array<double, 2> h{};         // spacings, h = extent/(n+1)

    Grid() = default;

    Grid(int dim_, std::array<double, 2> extent_, std::array<int, 2> n_) {
        require(dim_ == 1 || dim_ == 2, "grid dim must be 1 or 2");
        dim = dim_;
        extent = extent_;
        n = n_;
        for (int ax = 0; ax < dim; ++ax) {
            require(extent[ax] > 0.0, "grid extent must be positive");
            require(n[ax] >= 16, "grid needs at least 16 interior nodes per axis");
            h[ax] = extent[ax] / static_cast<double>(n[ax] + 1);
        }
        for (int ax = dim; ax < 2; ++ax) {
            extent[ax] = 0.0;
            n[ax] = 1;
            h[ax] = 0.0;
        }
    }

    static Grid interval(double length, int nodes) {
        return Grid(1, {length, 0.0}, {nodes, 1});
    }
    static Grid rectangle(double lx, double ly, int nx, int ny) {
        return Grid(2, {lx, ly}, {nx, ny});
    }

    std::size_t size() const {
        return static_cast<std::size_t>(n[0]) * (dim == 2 ? static_cast<std::size_t>(n[1]) : 1u);
    }

    // Quadrature weight of one node (h, or hx*hy).
    double cell_volume() const { return dim == 1 ? h[0] : h[0] * h[1]; }

    double coord(int ax, int i) const { return (i + 1) * h[ax]; }

    std::array<double, 2> node_coords(std::size_t idx) const {
        if (dim == 1) return {coord(0, static_cast<int>(idx)), 0.0};
        const int ix = static_cast<int>(idx % static_cast<std::size_t>(n[0]));
        const int iy = static_cast<int>(idx / static_cast<std::size_t>(n[0]));
        return {coord(0, ix), coord(1, iy)};
    }

    std::array<double, 2> center() const {
        return {0.5 * extent[0], dim == 2 ? 0.5 * extent[1] : 0.0};
    }

    bool operator==(const Grid& o) const {
        if (dim != o.dim) return false;
        for (int ax = 0; ax < dim; ++ax)
            if (extent[ax] != o.extent[ax] || n[ax] != o.n[ax]) return false;
        return true;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

// Interior-node values of a function that vanishes on the boundary.
struct Field {
    Grid grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid& g) : grid(g), values(g.size(), 0.0) {}
    Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        require(values.size() == g.size(), "field length must equal interior node count");
    }

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

inline void check_same_grid(const Grid& a, const Grid& b, const char* op) {
    if (a != b) throw GridMismatchError(std::string(op) + ": fields live on different grids");
}

// Second-order centered-difference Dirichlet Laplacian (the signed Laplacian,
// not its negative). Off-grid neighbors contribute the boundary value 0.
inline Field laplacian_apply(const Grid& g, const Field& u) {
    check_same_grid(g, u.grid, "laplacian_apply");
    Field out(g);
    if (g.dim == 1) {
        const int n = g.n[0];
        const double ih2 = 1.0 / (g.h[0] * g.h[0]);
        for (int i = 0; i < n; ++i) {
            const double left = i > 0 ? u.values[i - 1] : 0.0;
            const double right = i + 1 < n ? u.values[i + 1] : 0.0;
            out.values[i] = (left - 2.0 * u.values[i] + right) * ih2;
        }
    } else {
        const int nx = g.n[0], ny = g.n[1];
        const double ihx2 = 1.0 / (g.h[0] * g.h[0]);
        const double ihy2 = 1.0 / (g.h[1] * g.h[1]);
        for (int iy = 0; iy < ny; ++iy) {
            const std::size_t row = static_cast<std::size_t>(iy) * nx;
            for (int ix = 0; ix < nx; ++ix) {
                const std::size_t k = row + ix;
                const double c = u.values[k];
                const double l = ix > 0 ? u.values[k - 1] : 0.0;
                const double r = ix + 1 < nx ? u.values[k + 1] : 0.0;
                const double d = iy > 0 ? u.values[k - nx] : 0.0;
                const double t = iy + 1 < ny ? u.values[k + nx] : 0.0;
                out.values[k] = (l - 2.0 * c + r) * ihx2 + (d - 2.0 * c + t) * ihy2;
            }
        }
    }
    return out;
}

inline double inner_l2(const Grid& g, const Field& u, const Field& v) {
    check_same_grid(g, u.grid, "inner_l2");
    check_same_grid(g, v.grid, "inner_l2");
    CompensatedSum s;
    for (std::size_t i = 0; i < u.size(); ++i) s.add(u.values[i] * v.values[i]);
    return s.value() * g.cell_volume();
}

inline double norm_l2_sq(const Grid& g, const Field& u) {
    check_same_grid(g, u.grid, "norm_l2_sq");
    CompensatedSum s;
    for (double x : u.values) s.add(x * x);
    return s.value() * g.cell_volume();
}

inline double norm_l2(const Grid& g, const Field& u) { return std::sqrt(norm_l2_sq(g, u)); }

// Sum of squared one-sided differences, including the jumps to the zero
// boundary values. Summation by parts makes this equal inner_l2(u, -lap u)
// up to roundoff, which the energy identities depend on.
inline double grad_norm_sq(const Grid& g, const Field& u) {
    check_same_grid(g, u.grid, "grad_norm_sq");
    CompensatedSum s;
    if (g.dim == 1) {
        const int n = g.n[0];
        double prev = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double cur = i < n ? u.values[i] : 0.0;
            const double d = cur - prev;
            s.add(d * d);
            prev = cur;
        }
        return s.value() / g.h[0];
    }
    const int nx = g.n[0], ny = g.n[1];
    const double wx = g.h[1] / g.h[0];  // (hx*hy)/hx^2
    const double wy = g.h[0] / g.h[1];
    for (int iy = 0; iy < ny; ++iy) {
        const std::size_t row = static_cast<std::size_t>(iy) * nx;
        double prev = 0.0;
        for (int ix = 0; ix <= nx; ++ix) {
            const double cur = ix < nx ? u.values[row + ix] : 0.0;
            const double d = cur - prev;
            s.add(wx * d * d);
            prev = cur;
        }
    }
    for (int ix = 0; ix < nx; ++ix) {
        double prev = 0.0;
        for (int iy = 0; iy <= ny; ++iy) {
            const double cur = iy < ny ? u.values[static_cast<std::size_t>(iy) * nx + ix] : 0.0;
            const double d = cur - prev;
            s.add(wy * d * d);
            prev = cur;
        }
    }
    return s.value();
}

inline double lp_integral(const Grid& g, const Field& u, double q) {
    check_same_grid(g, u.grid, "lp_integral");
    require(q >= 1.0, "lp_integral requires q >= 1");
    CompensatedSum s;
    if (q == 2.0) {
        for (double x : u.values) s.add(x * x);
    } else {
        for (double x : u.values) s.add(std::pow(std::abs(x), q));
    }
    return s.value() * g.cell_volume();
}

// Multilinear interpolation of the zero-extended field at a physical point.
inline double field_interpolate(const Field& u, double x, double y = 0.0) {
    const Grid& g = u.grid;
    auto sample1d = [&](int ax, double pos, int& i0, double& w) {
        // node i sits at (i+1)h; cell index relative to the padded grid
        const double s = pos / g.h[ax] - 1.0;
        const double f = std::floor(s);
        i0 = static_cast<int>(f);
        w = s - f;
    };
    auto node_value_1d = [&](int i) -> double {
        return (i >= 0 && i < g.n[0]) ? u.values[static_cast<std::size_t>(i)] : 0.0;
    };
    if (g.dim == 1) {
        if (x <= 0.0 || x >= g.extent[0]) return 0.0;
        int i0;
        double w;
        sample1d(0, x, i0, w);
        return (1.0 - w) * node_value_1d(i0) + w * node_value_1d(i0 + 1);
    }
    if (x <= 0.0 || x >= g.extent[0] || y <= 0.0 || y >= g.extent[1]) return 0.0;
    int i0, j0;
    double wx, wy;
    sample1d(0, x, i0, wx);
    sample1d(1, y, j0, wy);
    auto node_value_2d = [&](int i, int j) -> double {
        if (i < 0 || i >= g.n[0] || j < 0 || j >= g.n[1]) return 0.0;
        return u.values[static_cast<std::size_t>(j) * g.n[0] + static_cast<std::size_t>(i)];
    };
    const double v00 = node_value_2d(i0, j0), v10 = node_value_2d(i0 + 1, j0);
    const double v01 = node_value_2d(i0, j0 + 1), v11 = node_value_2d(i0 + 1, j0 + 1);
    return (1.0 - wy) * ((1.0 - wx) * v00 + wx * v10) + wy * ((1.0 - wx) * v01 + wx * v11);
}

// Resamples a field onto another grid over the same physical domain.
inline Field field_regrid(const Field& u, const Grid& target) {
    Field out(target);
    for (std::size_t k = 0; k < target.size(); ++k) {
        const auto xy = target.node_coords(k);
        out.values[k] = field_interpolate(u, xy[0], xy[1]);
    }
    return out;
}

// In-place vector helpers used throughout the solvers.
inline void axpy(Field& y, double alpha, const Field& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y.values[i] += alpha * x.values[i];
}
inline void scale(Field& y, double alpha) {
    for (double& v : y.values) v *= alpha;
}
inline Field lin_comb(double a, const Field& x, double b, const Field& y) {
    Field out(x.grid);
    for (std::size_t i = 0; i < x.size(); ++i) out.values[i] = a * x.values[i] + b * y.values[i];
    return out;
}

}  // namespace kirchhoff
