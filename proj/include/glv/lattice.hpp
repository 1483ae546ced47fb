#pragma once

#include <array>
#include <complex>
#include <cstdint>

namespace glv {

using cd = std::complex<double>;

struct Vec2 {
    double x = 0.0, y = 0.0;
    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}
    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const;
    // perp rotates by +90 degrees: x^perp = (-x2, x1)
    Vec2 perp() const { return {-y, x}; }
};

// a ^ b = a1*b2 - a2*b1
inline double wedge(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

// Basis-change word in SL(2,Z) accumulated during fundamental-domain reduction,
// acting as tau -> (a*tau + b)/(c*tau + d).
struct Sl2z {
    std::int64_t a = 1, b = 0, c = 0, d = 1;
    Sl2z compose(const Sl2z& rhs) const;  // this ∘ rhs
    cd apply(cd tau) const;
    std::int64_t det() const { return a * d - b * c; }
};

// Lattice-shape moduli and rescaled cell geometry.
//
// tau is the ratio of the two basis vectors as complex numbers, reduced to the
// modular fundamental domain: |tau| >= 1, -1/2 < Re tau <= 1/2, Im tau > 0,
// and Re tau >= 0 when |tau| = 1. The rescaled cell has side r_tau =
// sqrt(2*pi / Im tau), so its area is exactly 2*pi; a cell carrying n flux
// quanta then has flux 2*pi*n with the background field of strength n.
struct LatticeShape {
    cd tau;
    double r_tau = 0.0;
    Vec2 t1, t2;          // t1 = r_tau*(1,0), t2 = r_tau*(Re tau, Im tau)
    double cell_area = 0.0;   // r_tau^2 * Im tau = 2*pi
    bool reflected = false;   // input had Im tau < 0, handled by conjugation
    Sl2z word;                // reduction word, tau = word.apply(tau_input)
};

// Reduce tau_raw to the fundamental domain and build the cell geometry.
// Throws std::invalid_argument when Im(tau_raw) == 0 (degenerate lattice).
LatticeShape normalize_shape(cd tau_raw);

// Geometry without normalization; tau must already satisfy Im tau > 0.
// Used internally for probing beta(tau) at arbitrary points of the upper
// half-plane (e.g. finite-difference gradients across the domain boundary).
LatticeShape shape_from_tau_unchecked(cd tau);

// True when tau satisfies the three fundamental-domain conditions up to tol.
bool in_fundamental_domain(cd tau, double tol = 1e-12);

// Physical parameters tied to the flux quantization. lambda = kappa^2*n/b and
// mu = kappa^2 - b are kept consistent by construction.
struct FluxParameters {
    int n = 1;
    double b = 1.0;
    double kappa = 1.0;
    double lambda = 1.0;
    double mu = 0.0;

    static FluxParameters from_kappa_b(double kappa, double b, int n);
    static FluxParameters from_kappa_lambda(double kappa, double lambda, int n);
};

// Shear m_tau mapping the fixed square lattice onto the tau-cell,
// m_tau = (Im tau)^{-1/2} [[1, Re tau], [0, Im tau]], det = 1.
struct ShearMap {
    double m[2][2];
    double minv[2][2];
    explicit ShearMap(cd tau);
    Vec2 apply(Vec2 v) const;
    Vec2 apply_inverse(Vec2 v) const;
    Vec2 apply_transpose(Vec2 v) const;
    double det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }
};

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kPi = 3.1415926535897932384626433832795;

}  // namespace glv
