#pragma once

#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "glv/fft.hpp"
#include "glv/grid.hpp"
#include "glv/stencil.hpp"

namespace glv {

struct ConvergenceError : std::runtime_error {
    double residual;
    int iterations;
    ConvergenceError(const std::string& what, double res, int it)
        : std::runtime_error(what), residual(res), iterations(it) {}
};

using ApplyFn = std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

struct IterStats {
    int iterations = 0;
    double residual = 0.0;
};

// Preconditioned conjugate gradient for a Hermitian positive definite
// operator; precond may be empty.
IterStats conjugate_gradient(const ApplyFn& op, const Eigen::VectorXcd& b, Eigen::VectorXcd& x,
                             double rtol, int maxit, const ApplyFn& precond = {});

// Fourier-diagonal approximate inverse (S(theta) + shift)^{-1} built from the
// symbol of the non-magnetic metric Laplacian of a CovariantStencil; used to
// precondition solves with the magnetic Laplacian.
class SpectralPrecond {
  public:
    SpectralPrecond(const CovariantStencil& st, double shift);
    void apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;

  private:
    SpectralOps sp_;
    Eigen::VectorXd inv_;
};

struct EigPair {
    double value;
    Eigen::VectorXcd vector;
};

// Discrete magnetic Schrodinger operator L^n = -Delta_{A0^n} with
// quasi-periodic boundary conditions, assembled matrix-free from the
// link-phase stencils.
class MagneticLaplacian {
  public:
    explicit MagneticLaplacian(const GridSpec& g, int order = 8);

    const GridSpec& grid() const { return g_; }
    const CovariantStencil& stencil() const { return st_; }

    void apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;

    // solve L x = b to relative tolerance (PCG with the spectral preconditioner)
    IterStats solve(const Eigen::VectorXcd& b, Eigen::VectorXcd& x, double rtol = 1e-13,
                    int maxit = 20000) const;

    // k smallest eigenpairs, eigenvalues ascending, eigenvectors orthonormal
    // in the quadrature inner product. Degenerate clusters are resolved by
    // deflated restarts; ties broken by fixing the largest-magnitude
    // component real positive.
    std::vector<EigPair> eigs_lowest(int k, double restol = 1e-10, unsigned seed = 12345) const;

  private:
    GridSpec g_;
    CovariantStencil st_;
    SpectralPrecond prec_;
};

class LadderOperators {
  public:
    explicit LadderOperators(const GridSpec& g, int order = 8) : st_(g, order) {}
    // sign = -1: L_- = D1 + i D2 ; sign = +1: L_+ = D1 - i D2
    CField apply(const CField& v, int sign) const;
    const CovariantStencil& stencil() const { return st_; }

  private:
    CovariantStencil st_;
};

// Maxwell-type solve in stream-function normal form.  Given density rho >= 0
// and a periodic current J, finds the mean-zero h with
//   Lap^2 h + curl(rho curl* h) = curl J,
// which is the divergence-free projection of (M + rho) a = J for a = curl* h.
// PCG preconditioned by the exact Fourier inverse of Lap^2.
struct StreamSolveResult {
    RField h;
    IterStats stats;
};
StreamSolveResult solve_m_plus_density(const RField& rho, const VField& J, double rtol = 1e-12,
                                       int maxit = 4000);

// residual of the projected equation, || curl[(M + rho) a - J] || with a = curl* h
double m_plus_density_residual(const RField& rho, const VField& J, const RField& h);

}  // namespace glv
