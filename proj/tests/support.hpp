#pragma once

#include <random>

#include "glv/grid.hpp"
#include "glv/stencil.hpp"
#include "glv/theta.hpp"

namespace glv::testsup {

// frozen fine-grid oracle values (N = 256, K = 30; stable to 8e-14 vs N = 384)
inline constexpr double kBetaSquare = 1.1803405990161;
inline constexpr double kBetaHex = 1.1595952669640;

inline cd tau_hex() { return std::polar(1.0, kPi / 3.0); }

// arbitrary (non-smooth) random complex field; for structural identities
inline CField random_field(const GridSpec& g, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    CField f(g);
    for (int i = 0; i < g.size(); ++i) f.v[i] = cd(gauss(rng), gauss(rng));
    return f;
}

// random combination of the lowest Landau levels: smooth quasi-periodic section
inline CField random_section(const GridSpec& g, std::mt19937_64& rng, int levels = 4) {
    std::normal_distribution<double> gauss;
    CField psi0 = ThetaState::basis_element(g.shape, g.n, 0).sample(g);
    CovariantStencil st(g);
    Eigen::VectorXcd level = psi0.v, acc = Eigen::VectorXcd::Zero(g.size());
    for (int k = 0; k <= levels; ++k) {
        acc += cd(gauss(rng), gauss(rng)) * level / level.norm();
        Eigen::VectorXcd next;
        st.ladder(level, next, +1);
        level = next;
    }
    CField out(g, acc);
    out.v /= norm_l2(out);
    return out;
}

}  // namespace glv::testsup
