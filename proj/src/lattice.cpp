#include "glv/lattice.hpp"

#include <cmath>
#include <stdexcept>

namespace glv {

double Vec2::norm() const { return std::hypot(x, y); }

Sl2z Sl2z::compose(const Sl2z& r) const {
    return {a * r.a + b * r.c, a * r.b + b * r.d, c * r.a + d * r.c, c * r.b + d * r.d};
}

cd Sl2z::apply(cd tau) const {
    return (cd(double(a)) * tau + cd(double(b))) / (cd(double(c)) * tau + cd(double(d)));
}

bool in_fundamental_domain(cd tau, double tol) {
    if (tau.imag() <= 0.0) return false;
    double abs2 = std::norm(tau);
    if (abs2 < 1.0 - tol) return false;
    if (tau.real() <= -0.5 - tol || tau.real() > 0.5 + tol) return false;
    if (std::abs(abs2 - 1.0) <= tol && tau.real() < -tol) return false;
    return true;
}

namespace {

LatticeShape build_geometry(cd tau) {
    LatticeShape s;
    s.tau = tau;
    s.r_tau = std::sqrt(kTwoPi / tau.imag());
    s.t1 = {s.r_tau, 0.0};
    s.t2 = {s.r_tau * tau.real(), s.r_tau * tau.imag()};
    s.cell_area = s.r_tau * s.r_tau * tau.imag();
    return s;
}

}  // namespace

LatticeShape shape_from_tau_unchecked(cd tau) {
    if (!(tau.imag() > 0.0))
        throw std::invalid_argument("lattice shape requires Im tau > 0");
    return build_geometry(tau);
}

LatticeShape normalize_shape(cd tau_raw) {
    if (tau_raw.imag() == 0.0)
        throw std::invalid_argument("degenerate lattice: Im tau = 0");

    bool reflected = false;
    cd tau = tau_raw;
    if (tau.imag() < 0.0) {
        tau = std::conj(tau);  // reflection symmetry
        reflected = true;
    }

    // Iterated T/S reduction. T: tau -> tau - k brings Re into (-1/2, 1/2];
    // S: tau -> -1/tau when |tau| < 1.
    Sl2z w;  // identity
    const double tol = 1e-14;
    for (int iter = 0; iter < 256; ++iter) {
        double k = std::floor(tau.real() + 0.5);
        if (tau.real() - k == -0.5) k -= 1.0;  // keep Re in (-1/2, 1/2]
        if (k != 0.0) {
            auto ki = static_cast<std::int64_t>(k);
            tau -= k;
            w = Sl2z{1, -ki, 0, 1}.compose(w);
        }
        if (std::norm(tau) < 1.0 - tol) {
            tau = -1.0 / tau;
            w = Sl2z{0, -1, 1, 0}.compose(w);
            continue;
        }
        break;
    }
    // Boundary ties: on |tau| = 1 require Re >= 0 (apply S once more);
    // Re = -1/2 is excluded in favour of +1/2.
    if (std::abs(std::norm(tau) - 1.0) <= tol && tau.real() < 0.0) {
        tau = -1.0 / tau;
        w = Sl2z{0, -1, 1, 0}.compose(w);
    }
    if (std::abs(tau.real() + 0.5) <= tol) {
        tau += 1.0;
        w = Sl2z{1, 1, 0, 1}.compose(w);
    }

    LatticeShape s = build_geometry(tau);
    s.reflected = reflected;
    s.word = w;
    return s;
}

FluxParameters FluxParameters::from_kappa_b(double kappa, double b, int n) {
    if (b <= 0.0) throw std::invalid_argument("flux density b must be positive");
    if (n < 1) throw std::invalid_argument("flux index n must be >= 1");
    FluxParameters f;
    f.n = n;
    f.b = b;
    f.kappa = kappa;
    f.lambda = kappa * kappa * n / b;
    f.mu = kappa * kappa - b;
    return f;
}

FluxParameters FluxParameters::from_kappa_lambda(double kappa, double lambda, int n) {
    if (lambda <= 0.0) throw std::invalid_argument("lambda must be positive");
    return from_kappa_b(kappa, kappa * kappa * n / lambda, n);
}

ShearMap::ShearMap(cd tau) {
    if (!(tau.imag() > 0.0)) throw std::invalid_argument("shear map requires Im tau > 0");
    double s = 1.0 / std::sqrt(tau.imag());
    m[0][0] = s;
    m[0][1] = s * tau.real();
    m[1][0] = 0.0;
    m[1][1] = s * tau.imag();
    // inverse of an upper-triangular 2x2 with unit determinant
    minv[0][0] = m[1][1];
    minv[0][1] = -m[0][1];
    minv[1][0] = 0.0;
    minv[1][1] = m[0][0];
}

Vec2 ShearMap::apply(Vec2 v) const {
    return {m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y};
}

Vec2 ShearMap::apply_inverse(Vec2 v) const {
    return {minv[0][0] * v.x + minv[0][1] * v.y, minv[1][0] * v.x + minv[1][1] * v.y};
}

Vec2 ShearMap::apply_transpose(Vec2 v) const {
    return {m[0][0] * v.x + m[1][0] * v.y, m[0][1] * v.x + m[1][1] * v.y};
}

}  // namespace glv
