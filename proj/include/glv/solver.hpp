#pragma once

#include <optional>
#include <vector>

#include "glv/fft.hpp"
#include "glv/grid.hpp"
#include "glv/operators.hpp"
#include "glv/stencil.hpp"

namespace glv {

// Periodic, mean-zero, divergence-free gauge perturbation stored through its
// stream function: a = curl* h, so conditions (i)-(iii) hold by construction.
struct GaugePerturbation {
    RField h;
    VField a;
};

struct BranchSample {
    double t = 0.0;       // branch amplitude <psi0_unit, psi>, real >= 0
    double lambda = 1.0;
    double mu = 0.0;      // kappa^2 (lambda - 1)/lambda
    CField psi;
    RField h;
    double energy = 0.0;
    double residual = 0.0;  // max of the two rescaled GL equation residuals
    int newton_iters = 0;
};

struct EnergyCurve {
    cd tau;
    double kappa = 0.0;
    std::vector<double> mu;       // realized mu values
    std::vector<double> energy;
    double e0_fit = 0.0, e1_fit = 0.0, e2_fit = 0.0;
    double fit_residual = 0.0;
    // beta-expansion predictions for e2: published constant and the exact one
    double e2_published = 0.0;
    double e2_exact = 0.0;
};

// Shared discrete context for the nonlinear solves at one (tau, kappa, grid).
class GlSolver {
  public:
    GlSolver(const LatticeShape& shape, double kappa, int N = 64, int K = 0, int order = 8);

    const GridSpec& grid() const { return g_; }
    double kappa() const { return kappa_; }
    // unit-L2 theta ground state used as the branch direction (N2 = 1 recorded)
    const CField& psi0_unit() const { return e0_; }
    const MagneticLaplacian& laplacian() const { return L_; }

    // a(psi) = (M + |psi|^2)^{-1} Im(conj(psi) D_{A0} psi), as a stream function
    GaugePerturbation solve_a(const CField& psi, double rtol = 1e-12) const;

    // residual of the order-parameter equation for given psi and gauge field
    CField F1(double lambda, const CField& psi, const GaugePerturbation& ga) const;
    // full reduced-map residual F(lambda, psi) with a = a(psi)
    CField F_residual(double lambda, const CField& psi) const;
    // stream-form residual norm of the gauge equation, ||curl[(M+|psi|^2)a - J(psi)]||
    double F2_residual_norm(const CField& psi, const GaugePerturbation& ga) const;

    // one branch point at amplitude t via full Newton on (psi, h, lambda)
    // with amplitude and phase constraints
    BranchSample branch_point(double t, std::optional<BranchSample> warm = {}) const;

    // continuation over ascending amplitudes; t = 0 emits the normal solution
    std::vector<BranchSample> branch(const std::vector<double>& t_values) const;

    // Lyapunov-Schmidt complement solve at fixed (lambda, t): w with
    // <psi0, w> = 0 and Q F(lambda, t psi0 + w) = 0, plus the bifurcation
    // function gamma(lambda, t) = <psi0, F(lambda, t psi0 + w)>
    struct LsResult {
        CField w;
        double gamma;
        double gamma_imag;   // should be ~1e-12 relative
        double q_residual;
        int iterations;
    };
    LsResult ls_solve_w(double lambda, double t) const;

    // average energy per cell E_lambda(psi, A0 + a)
    double energy(const CField& psi, const VField& a, double lambda) const;
    double energy(const CField& psi, const GaugePerturbation& ga, double lambda) const;

    // energy samples along the branch at prescribed mu values + quadratic fit
    EnergyCurve energy_curve(const std::vector<double>& mu_values) const;

    // Newton on (psi, h) at fixed lambda without amplitude constraints;
    // converges to the normal state or onto the branch orbit
    struct FixedLambdaResult {
        CField psi;
        RField h;
        double residual;
        int iterations;
        bool converged;
    };
    FixedLambdaResult newton_fixed_lambda(double lambda, const CField& psi_init,
                                          int max_newton = 40) const;

    // closed-form branch slope (kappa^2 - 1/2) N4/N2 + N2/(4 pi) for a psi0
    // with recorded normalization
    static double g_lambda_prime0(double kappa, const CField& psi0);

    // theta ground state scaled so that N2 solves the mu-expansion
    // solvability relation (unit mu^{1/2} coefficient)
    static CField psi0_normalized(const LatticeShape& shape, double kappa, const GridSpec& grid,
                                  int K = 0);

    const CovariantStencil& stencil() const { return st_; }
    const SpectralOps& spectral() const { return sp_; }

  private:
    GridSpec g_;
    double kappa_;
    CovariantStencil st_;
    SpectralOps sp_;
    MagneticLaplacian L_;
    SpectralPrecond psi_prec_;
    CField e0_;
    double gprime0_;  // slope formula for the unit-normalized psi0

    // symmetrized advection i (a . D psi + D . (a psi)); exactly Hermitian as
    // a quadratic form, which keeps <psi, F1> real to machine precision
    Eigen::VectorXcd advection(const VField& a, const Eigen::VectorXcd& psi,
                               const Eigen::VectorXcd& gx, const Eigen::VectorXcd& gy) const;
    VField current(const Eigen::VectorXcd& psi, const Eigen::VectorXcd& gx,
                   const Eigen::VectorXcd& gy) const;

    struct PackedState;
    friend struct PackedState;
};

// dense quadratic least squares fit y ~ c0 + c1 x + c2 x^2
std::array<double, 4> quadratic_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace glv
