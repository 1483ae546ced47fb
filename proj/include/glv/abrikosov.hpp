#pragma once

#include <vector>

#include "glv/grid.hpp"

namespace glv {

// Abrikosov ratio of the n = 1 theta-series ground state, reported in the
// cell-averaged convention
//
//   beta(tau) = <|psi0|^4> / <|psi0|^2>^2 = |cell| * N4 / N2^2,
//
// which is scale invariant in psi0, > 1 by Cauchy-Schwarz, and takes the
// classical values ~1.1596 (triangular) and ~1.1803 (square). N2 and N4 are
// the plain integrals, which is what the energy-expansion formulas consume.
struct BetaResult {
    cd tau;          // the tau actually evaluated (normalized)
    double beta = 0.0;
    double N2 = 0.0;  // integral |psi0|^2
    double N4 = 0.0;  // integral |psi0|^4
    int N = 0;        // grid resolution used
    int K = 0;        // series truncation used
    bool was_normalized = false;  // input tau was outside the fundamental domain
};

struct BetaOptions {
    int N = 128;
    int K = 25;
};

// Evaluate at the fundamental-domain representative of tau (auto-normalizes,
// flagging the result when it had to).
BetaResult beta(cd tau, const BetaOptions& opt = {});

// Evaluate at tau as given (any Im tau > 0); used for finite-difference
// probes across the fundamental-domain boundary.
BetaResult beta_raw(cd tau, const BetaOptions& opt = {});

struct BetaScanRow {
    double re, im, beta, N2, N4;
};
struct BetaScan {
    std::vector<BetaScanRow> rows;
    int nre = 0, nim = 0;
};

// Dense table over a rectangle, restricted to points of the fundamental
// domain. Throws on an empty range.
BetaScan beta_scan(double re0, double re1, int nre, double im0, double im1, int nim,
                   const BetaOptions& opt = {});

Vec2 beta_gradient(cd tau, double step = 1e-4, const BetaOptions& opt = {});
// symmetric 2x2 Hessian entries (d_rere, d_reim, d_imim)
std::array<double, 3> beta_hessian(cd tau, double step = 2e-3, const BetaOptions& opt = {});

struct MinimizeResult {
    cd tau_star;
    double beta_star = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
};

// Nelder-Mead descent in (Re tau, Im tau) with fundamental-domain
// re-normalization, followed by a Newton polish of the gradient. The reported
// minimizer is the reflection representative with Re tau >= 0.
MinimizeResult minimize_beta(cd start, double tol = 1e-7, const BetaOptions& opt = {});

// Zeros of the beta gradient inside [re0,re1] x [im0,im1] (fundamental-domain
// part), found by Newton polish from a seed grid and clustered.
std::vector<cd> beta_critical_points(double re0, double re1, double im0, double im1,
                                     double tol = 1e-6, const BetaOptions& opt = {});

// mu^2 coefficient of the per-cell energy expansion. Two variants:
//
//  - e2_published: kappa^4/(4 pi) - 1/(1 + 4 pi (kappa^2 - 1/2) N4/N2^2),
//    the form printed with the expansion theorem;
//  - e2_exact:     1 - 1/(1 + 4 pi (kappa^2 - 1/2) N4/N2^2).
//
// Since lambda(mu) = kappa^2/(kappa^2 - mu) exactly, the background-field
// piece kappa^4/lambda^2 contributes exactly mu^2, fixing the constant term
// to 1; full-solve energy fits confirm the exact form (and it vanishes at
// the self-dual point kappa^2 = 1/2, as it must). The tau-dependent part is
// identical in both, so either yields the same argmin over shapes, strictly
// increasing in beta for kappa^2 > 1/2.
double e2_published(double kappa, const BetaResult& b);
double e2_exact(double kappa, const BetaResult& b);
double e2_published_from_beta(double kappa, double beta_avg);
double e2_exact_from_beta(double kappa, double beta_avg);

}  // namespace glv
