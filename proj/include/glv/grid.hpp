#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "glv/lattice.hpp"

namespace glv {

// Uniform grid in lattice (fractional) coordinates: point (p, q) sits at
// x = (p/N1) t1 + (q/N2) t2, p = 0..N1-1, q = 0..N2-1. Storage is row-major
// with p (the t1 index) fastest; this layout is normative for file I/O.
struct GridSpec {
    LatticeShape shape;
    int n = 1;       // flux quanta per cell
    int N1 = 64, N2 = 64;
    double quad_weight = 0.0;  // cell_area / (N1*N2)

    GridSpec() = default;
    GridSpec(const LatticeShape& s, int n_, int N1_, int N2_) : shape(s), n(n_), N1(N1_), N2(N2_) {
        if (n < 1) throw std::invalid_argument("GridSpec: n must be >= 1");
        if (N1 < 8 || N2 < 8 || N1 % 2 || N2 % 2)
            throw std::invalid_argument("GridSpec: N1, N2 must be even and >= 8");
        quad_weight = shape.cell_area / (double(N1) * double(N2));
    }

    int size() const { return N1 * N2; }
    int idx(int p, int q) const { return q * N1 + p; }
    Vec2 point(int p, int q) const {
        double a = double(p) / N1, b = double(q) / N2;
        return {a * shape.t1.x + b * shape.t2.x, a * shape.t1.y + b * shape.t2.y};
    }
    // area of one elementary plaquette; the basic link-phase unit
    double phi0() const { return shape.cell_area / (double(N1) * double(N2)); }

    bool compatible(const GridSpec& o) const {
        return N1 == o.N1 && N2 == o.N2 && n == o.n &&
               std::abs(shape.tau - o.shape.tau) < 1e-13;
    }
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b) {
    if (!a.compatible(b)) throw std::invalid_argument("grid mismatch");
}

// Complex scalar samples of a quasi-periodic field psi over one cell.
// The quasi-periodicity psi(x+t) = e^{(i n/2) t^x} psi(x), t = t1, t2, is
// never stored; it enters through the boundary-wrap phases of all stencils.
struct CField {
    GridSpec grid;
    Eigen::VectorXcd v;

    CField() = default;
    explicit CField(const GridSpec& g) : grid(g), v(Eigen::VectorXcd::Zero(g.size())) {}
    CField(const GridSpec& g, Eigen::VectorXcd data) : grid(g), v(std::move(data)) {
        if (v.size() != grid.size()) throw std::invalid_argument("CField: size mismatch");
    }
    cd& at(int p, int q) { return v[grid.idx(p, q)]; }
    cd at(int p, int q) const { return v[grid.idx(p, q)]; }
};

// Real periodic scalar samples (stream functions, densities, curls).
struct RField {
    GridSpec grid;
    Eigen::VectorXd v;

    RField() = default;
    explicit RField(const GridSpec& g) : grid(g), v(Eigen::VectorXd::Zero(g.size())) {}
    RField(const GridSpec& g, Eigen::VectorXd data) : grid(g), v(std::move(data)) {
        if (v.size() != grid.size()) throw std::invalid_argument("RField: size mismatch");
    }
    double& at(int p, int q) { return v[grid.idx(p, q)]; }
    double at(int p, int q) const { return v[grid.idx(p, q)]; }
};

// Two-component real vector field on the grid (Cartesian components).
struct VField {
    GridSpec grid;
    Eigen::VectorXd x, y;

    VField() = default;
    explicit VField(const GridSpec& g)
        : grid(g), x(Eigen::VectorXd::Zero(g.size())), y(Eigen::VectorXd::Zero(g.size())) {}
};

// Trapezoidal quadrature on the torus: equal weights, spectrally accurate for
// smooth periodic integrands.
inline double integrate(const RField& f) { return f.grid.quad_weight * f.v.sum(); }
inline cd integrate(const CField& f) { return f.grid.quad_weight * f.v.sum(); }

// <f, g> = integral of conj(f) g over the cell.
inline cd dotc(const CField& f, const CField& g) {
    require_same_grid(f.grid, g.grid);
    return f.grid.quad_weight * f.v.dot(g.v);  // Eigen dot conjugates the left factor
}
inline double norm_l2(const CField& f) { return std::sqrt(f.grid.quad_weight) * f.v.norm(); }
inline double norm_l2(const RField& f) { return std::sqrt(f.grid.quad_weight) * f.v.norm(); }
inline double norm_l2(const VField& a) {
    return std::sqrt(a.grid.quad_weight * (a.x.squaredNorm() + a.y.squaredNorm()));
}

double integrate_abs2(const CField& f);   // integral of |f|^2
double integrate_abs4(const CField& f);   // integral of |f|^4

// Pointwise sample of a closed-form function f(x) on the grid.
template <class F>
CField sample(const GridSpec& g, F&& f) {
    CField out(g);
    for (int q = 0; q < g.N2; ++q)
        for (int p = 0; p < g.N1; ++p) out.v[g.idx(p, q)] = f(g.point(p, q));
    return out;
}

template <class F>
RField sample_real(const GridSpec& g, F&& f) {
    RField out(g);
    for (int q = 0; q < g.N2; ++q)
        for (int p = 0; p < g.N1; ++p) out.v[g.idx(p, q)] = f(g.point(p, q));
    return out;
}

// Pull-back to the fixed square computational lattice: out(x) = f(m_tau x).
// m_tau maps the square-cell basis onto the tau-cell basis, so samples map
// grid point to grid point and only the grid metadata changes; the wedge
// product (hence every quasi-periodic phase) is preserved since det m = 1.
CField shear_to_square(const CField& f);
CField shear_from_square(const CField& f, const LatticeShape& shape);
// vector fields transform with the transpose: out(x) = m_tau^t A(m_tau x)
VField shear_to_square(const VField& A);
VField shear_from_square(const VField& A, const LatticeShape& shape);

// flux of a sampled vector potential through the cell: the quantized part is
// identified from interior finite differences and the periodic remainder is
// integrated spectrally (it contributes zero up to quadrature roundoff)
double flux_of(const VField& A);

}  // namespace glv
