#include "glv/fft.hpp"
#include "glv/gauge.hpp"
#include "glv/grid.hpp"

#include <stdexcept>

namespace glv {

namespace {

GridSpec square_grid_like(const GridSpec& g) {
    return GridSpec(normalize_shape(cd(0.0, 1.0)), g.n, g.N1, g.N2);
}

}  // namespace

CField shear_to_square(const CField& f) {
    return CField(square_grid_like(f.grid), f.v);
}

CField shear_from_square(const CField& f, const LatticeShape& shape) {
    if (std::abs(f.grid.shape.tau - cd(0, 1)) > 1e-12)
        throw std::invalid_argument("shear_from_square: input is not on the square lattice");
    return CField(GridSpec(shape, f.grid.n, f.grid.N1, f.grid.N2), f.v);
}

VField shear_to_square(const VField& A) {
    ShearMap m(A.grid.shape.tau);
    VField out(square_grid_like(A.grid));
    for (int i = 0; i < A.grid.size(); ++i) {
        Vec2 v = m.apply_transpose({A.x[i], A.y[i]});
        out.x[i] = v.x;
        out.y[i] = v.y;
    }
    return out;
}

VField shear_from_square(const VField& A, const LatticeShape& shape) {
    if (std::abs(A.grid.shape.tau - cd(0, 1)) > 1e-12)
        throw std::invalid_argument("shear_from_square: input is not on the square lattice");
    ShearMap m(shape.tau);
    VField out(GridSpec(shape, A.grid.n, A.grid.N1, A.grid.N2));
    // inverse of the transpose
    for (int i = 0; i < A.grid.size(); ++i) {
        Vec2 v{A.x[i], A.y[i]};
        Vec2 w{m.minv[0][0] * v.x + m.minv[1][0] * v.y,
               m.minv[0][1] * v.x + m.minv[1][1] * v.y};
        out.x[i] = w.x;
        out.y[i] = w.y;
    }
    return out;
}

double flux_of(const VField& A) {
    double crude = estimate_flux(A);
    double quanta = crude / kTwoPi;
    long n = std::lround(quanta);
    if (n < 0 || std::abs(quanta - double(n)) > 0.2)
        throw std::invalid_argument("flux_of: flux per cell is not quantized");
    VField p(A.grid);
    VField A0 = background_potential(A.grid, int(n));
    p.x = A.x - A0.x;
    p.y = A.y - A0.y;
    SpectralOps sp(A.grid);
    return double(n) * A.grid.shape.cell_area + integrate(sp.curl(p));
}

}  // namespace glv
