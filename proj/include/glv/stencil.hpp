#pragma once

#include <functional>
#include <vector>

#include "glv/grid.hpp"

namespace glv {

// Covariant finite differences for quasi-periodic fields in the symmetric
// background gauge A0 = (n/2) x^perp.
//
// Samples are combined after parallel transport along grid lines: the link
// phase exp(-i (n/2) x ^ v) for a straight step v is exact for A0, so stencils
// act on a function whose local variation is governed by covariant
// derivatives only.  Crossing a cell edge additionally applies the
// quasi-periodic phase exp((i n/2) t ^ x); discrete flux per cell is exactly
// 2 pi n and all stencil operators commute with the magnetic translations.
//
// First-derivative stencils are antisymmetric and second-derivative stencils
// symmetric with unitary transport, so directional derivatives are exactly
// anti-Hermitian / Hermitian in the quadrature inner product.
class CovariantStencil {
  public:
    explicit CovariantStencil(const GridSpec& g, int order = 8);

    const GridSpec& grid() const { return g_; }
    int order() const { return order_; }

    // directional derivatives along the grid step vectors e_u = t1/N1,
    // e_v = t2/N2 (index units): d1 ~ e.D, d2 ~ (e.D)^2 with D = grad - i A0
    void d1u(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;
    void d1v(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;
    void d2u(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;
    void d2v(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;

    // magnetic Laplacian L^n = -Delta_{A0} via the inverse Gram matrix of the
    // step vectors; Hermitian by construction
    void laplacian(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;

    // Cartesian covariant gradient (D1 psi, D2 psi), D = grad - i A0
    void grad_cart(const Eigen::VectorXcd& in, Eigen::VectorXcd& outx,
                   Eigen::VectorXcd& outy) const;

    // covariant divergence D1 Fx + D2 Fy of a quasi-periodic 2-component field
    void div_cart(const Eigen::VectorXcd& inx, const Eigen::VectorXcd& iny,
                  Eigen::VectorXcd& out) const;

    // ladder operators L_- = D1 + i D2, L_+ = D1 - i D2
    void ladder(const Eigen::VectorXcd& in, Eigen::VectorXcd& out, int sign) const;

    // sample of the field at logical index (P, Q), wrapping any number of
    // cells with the quasi-periodic phases. c1/c2 are extra constant cocycle
    // phases per t1/t2 crossing (zero for the standard section convention).
    cd fetch_logical(const CField& f, long P, long Q, double c1 = 0.0, double c2 = 0.0) const;

    // value of the (interpolated) section at an arbitrary point z, via
    // order()-point tensor Lagrange interpolation of the parallel-transported
    // samples around z
    cd value_at(const CField& f, Vec2 z, double c1 = 0.0, double c2 = 0.0) const;

    // translated section: out(x) = f(x + l)
    CField translate(const CField& f, Vec2 l, double c1 = 0.0, double c2 = 0.0) const;

    // lattice-preserving rotations: out(x) = f(Rx). rotate90 requires tau = i,
    // rotate60 requires tau = e^{i pi/3}; both need N1 == N2.
    CField rotate90(const CField& f) const;
    CField rotate60(const CField& f) const;

    // inverse Gram matrix of (e_u, e_v)
    double G11() const { return G11_; }
    double G12() const { return G12_; }
    double G22() const { return G22_; }

  private:
    GridSpec g_;
    int order_, hw_;
    double G11_, G12_, G22_;
    double jinvT_[2][2];  // Cartesian gradient = jinvT * (d1u, d1v)
    std::vector<double> c1_, c2_;  // stencil coefficients, index units
    // link phase tables: pu_[k+hw][q], pv_[k+hw][p]
    std::vector<std::vector<cd>> pu_, pv_;
    std::vector<cd> wrap_u_, wrap_v_;  // crossing +t1 (per q), +t2 (per p)

    void apply_dir_u(const Eigen::VectorXcd& in, Eigen::VectorXcd& out,
                     const std::vector<double>& c) const;
    void apply_dir_v(const Eigen::VectorXcd& in, Eigen::VectorXcd& out,
                     const std::vector<double>& c) const;
    cd path_phase(long pa, long qa, double alpha, double beta) const;
};

// full covariant gradient (grad - i A0 - i a) psi as Cartesian components;
// pass a = nullptr for the background gauge alone
std::pair<CField, CField> covariant_gradient(const CField& psi, const VField* a = nullptr,
                                             int order = 8);

// Max residual of the quasi-periodicity condition for a closed-form function:
// max over boundary pairs of |f(x+t) - e^{(i n/2) t^x} f(x)|, t = t1, t2.
double quasiperiodicity_residual(const GridSpec& g, const std::function<cd(Vec2)>& f);

// Total phase winding of the stored section around all plaquettes (equals the
// number of zeros counted with multiplicity; n for a nondegenerate cell), and
// the number of plaquettes carrying nonzero winding.
struct WindingCount {
    int total = 0;
    int plaquettes = 0;
};
WindingCount count_zeros(const CField& f);

}  // namespace glv
