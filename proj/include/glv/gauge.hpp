#pragma once

#include "glv/fft.hpp"
#include "glv/grid.hpp"
#include "glv/solver.hpp"

namespace glv {

// A lattice state before gauge fixing. The stored arrays sample one cell of a
// state whose vector potential is A0-background plus a doubly periodic part,
// A(x+t) = A(x) + (b/2) t^perp; the order parameter extends by
//   psi(x + t_j) = e^{i[(b/2) t_j ^ x + c_j]} psi(x),
// with the cocycle constants c1, c2 recorded alongside the samples (zero for
// the normal-form convention).
struct RawLatticeState {
    GridSpec grid;
    CField psi;
    VField A;
    double c1 = 0.0, c2 = 0.0;
};

struct GaugeFixReport {
    double flux = 0.0;        // measured flux per cell
    int n = 0;                // snapped flux quanta
    double b = 0.0;           // average flux density
    Vec2 translation;         // applied cell translation l
    double cocycle[2] = {0, 0};  // extracted constants C_t before translation
    double cocycle_spread = 0.0; // x-dependence of the extracted constants
    double mean_a = 0.0;      // |mean of output a|
    double div_a = 0.0;       // ||div a|| of output
    double stream_residual = 0.0;  // ||a - curl* h|| of the projection
    double quasi_residual = 0.0;   // residual of the phase condition (iv)
};

struct GaugeFixResult {
    CField phi;
    GaugePerturbation gauge;
    GaugeFixReport report;
};

// Constructive normal form (phi, A0 + a): a periodic, mean-zero,
// divergence-free (stream-function form), phi quasi-periodic with the
// symmetric-gauge phases. Line-integral construction along the coordinate
// axes; the residual cocycle constants are removed by a cell translation.
// Throws std::invalid_argument when the flux per cell is not quantized.
GaugeFixResult fix_gauge(const RawLatticeState& state);

// mean-zero periodic solution of  Lap u = rhs  (Fourier-exact on the grid);
// rejects rhs with nonzero mean.
RField solve_periodic_poisson(const RField& rhs, double mean_tol = 1e-12);

// x1-line-averaged magnetic field B(zeta) on the N2 grid rows, plus its mean.
struct LineAveragedB {
    Eigen::VectorXd B;     // one value per row q, height zeta_q = q * r tau2 / N2
    double period = 0.0;   // r tau2
    double average = 0.0;  // = b
};
LineAveragedB line_averaged_B(const RawLatticeState& state);

// vector potential samples of the symmetric-gauge background (n/2) x^perp
VField background_potential(const GridSpec& g, int n);

// crude flux estimate from interior finite differences of sampled A; used to
// snap the quantized flux and to reject non-lattice inputs
double estimate_flux(const VField& A);

}  // namespace glv
