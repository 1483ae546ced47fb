#pragma once

#include <Eigen/Dense>
#include <vector>

#include "glv/grid.hpp"

namespace glv {

// Spectral calculus for doubly periodic fields on the (possibly sheared) cell.
// Modes are e^{i g.x} with g = m1*b1 + m2*b2 on the reciprocal basis
// (b_i . t_j = 2 pi delta_ij), so constant-coefficient operators are exact on
// grid-resolved modes. Quasi-periodic fields never pass through here.
class SpectralOps {
  public:
    explicit SpectralOps(const GridSpec& g);

    const GridSpec& grid() const { return g_; }

    // forward/backward DFT, normalized so backward(forward(f)) = f
    Eigen::VectorXcd forward(const Eigen::VectorXcd& f) const;
    Eigen::VectorXcd backward(const Eigen::VectorXcd& fhat) const;
    Eigen::VectorXcd forward(const Eigen::VectorXd& f) const;
    Eigen::VectorXd backward_real(const Eigen::VectorXcd& fhat) const;

    RField dx(const RField& f) const;
    RField dy(const RField& f) const;
    RField laplacian(const RField& f) const;
    // mean-zero solution of  Lap u = f  (f must have zero mean)
    RField inv_laplacian(const RField& f) const;
    // mean-zero solution of  Lap^2 u = f
    RField inv_biharmonic(const RField& f) const;
    // mean-zero solution of (Lap^2 + c) u = f, c >= 0 (preconditioner)
    RField inv_biharmonic_shifted(const RField& f, double c) const;

    VField curl_star(const RField& h) const;     // (d2 h, -d1 h)
    RField curl(const VField& a) const;          // d1 a2 - d2 a1
    RField div(const VField& a) const;
    VField grad(const RField& f) const;

    // translate a periodic field by a Cartesian vector l (trigonometric shift)
    RField translate(const RField& f, Vec2 l) const;
    Eigen::VectorXcd translate(const Eigen::VectorXcd& f, Vec2 l) const;

    // evaluate the trigonometric interpolant of a periodic field at fractional
    // coordinates (s1, s2) in cell units
    cd eval_at(const Eigen::VectorXcd& coeff, double s1, double s2) const;

    // reciprocal vector of mode (a1, a2) (storage index order)
    Vec2 gvec(int a1, int a2) const;
    // symmetrized |g|^2 used for real-field symbols (Nyquist-safe)
    double g2_sym(int a1, int a2) const;

  private:
    GridSpec g_;
    Vec2 b1_, b2_;
    std::vector<int> m1_, m2_;  // signed frequency per storage index

    Eigen::VectorXcd apply_symbol(const Eigen::VectorXd& f,
                                  const std::vector<cd>& symbol) const;
};

// 1-D spectral helpers used by the gauge construction.
// antiderivative: F(j) = integral_0^{x_j} f, for periodic f sampled on N
// points over period L; the mean of f contributes the linear part exactly.
Eigen::VectorXd periodic_antiderivative(const Eigen::VectorXd& f, double L);
// same, but also return the series so values between samples can be evaluated
struct PeriodicAntideriv {
    Eigen::VectorXcd coeff;  // Fourier coefficients of the mean-zero part of f
    double mean = 0.0;
    double L = 1.0;
    // integral_0^s f  (s in [0, L])
    double eval(double s) const;
};
PeriodicAntideriv periodic_antiderivative_series(const Eigen::VectorXd& f, double L);

}  // namespace glv
