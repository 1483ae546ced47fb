#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "glv/abrikosov.hpp"
#include "glv/fft.hpp"
#include "glv/stencil.hpp"
#include "glv/theta.hpp"
#include "support.hpp"

using namespace glv;
using namespace glv::testsup;

TEST_CASE("quadrature integrates constants and kills nonzero modes") {
    GridSpec g(normalize_shape(cd(0.2, 1.1)), 1, 16, 16);
    RField one(g, Eigen::VectorXd::Ones(g.size()));
    CHECK(integrate(one) == doctest::Approx(kTwoPi).epsilon(1e-14));

    SpectralOps sp(g);
    Vec2 gv = sp.gvec(3, 14);
    CField mode = sample(g, [&](Vec2 x) { return std::polar(1.0, gv.x * x.x + gv.y * x.y); });
    CHECK(std::abs(integrate(mode)) < 1e-12);
}

TEST_CASE("integration rejects grid mismatch") {
    GridSpec a(normalize_shape(cd(0, 1)), 1, 16, 16), b(normalize_shape(cd(0, 1)), 1, 32, 32);
    CHECK_THROWS_AS(dotc(CField(a), CField(b)), std::invalid_argument);
}

TEST_CASE("beta integrand quadrature converges spectrally") {
    // a tall cell keeps the density under-resolved at N = 8, so the
    // tenfold-per-doubling contract is visible before the machine floor
    cd tall(0.0, 3.0);
    double ref = beta(tall, {64, 30}).beta;
    double e8 = std::abs(beta(tall, {8, 30}).beta - ref);
    double e16 = std::abs(beta(tall, {16, 30}).beta - ref);
    CHECK(e8 > 1e-10);
    CHECK(e16 <= std::max(e8 / 10.0, 5e-13));
}

TEST_CASE("directional stencils are exactly anti-Hermitian / Hermitian") {
    std::mt19937_64 rng(5);
    GridSpec g(normalize_shape(cd(0.3, 1.2)), 2, 16, 24);
    CovariantStencil st(g);
    CField u = random_field(g, rng), v = random_field(g, rng);
    Eigen::VectorXcd du, dv;

    st.d1u(u.v, du);
    st.d1u(v.v, dv);
    cd lhs = u.v.dot(dv), rhs = du.dot(v.v);
    CHECK(std::abs(lhs + rhs) < 1e-12 * u.v.norm() * v.v.norm());

    st.laplacian(u.v, du);
    st.laplacian(v.v, dv);
    CHECK(std::abs(u.v.dot(dv) - du.dot(v.v)) < 1e-11 * u.v.norm() * v.v.norm());
}

TEST_CASE("Laplacian commutes with the finite magnetic translation group") {
    // On the n-flux cell only shifts by t/n respect the boundary bundle; for
    // n = 2 the half-lattice magnetic translations are strict symmetries.
    std::mt19937_64 rng(17);
    GridSpec g(normalize_shape(cd(0.5, 0.9)), 2, 16, 16);
    CovariantStencil st(g);
    CField u = random_field(g, rng);
    for (auto [dp, dq] : {std::pair<int, int>{g.N1 / 2, 0}, {0, g.N2 / 2},
                          {g.N1 / 2, g.N2 / 2}}) {
        Vec2 v = g.shape.t1 * (double(dp) / g.N1) + g.shape.t2 * (double(dq) / g.N2);
        auto tshift = [&](const CField& f) {
            CField out(g);
            for (int q = 0; q < g.N2; ++q)
                for (int p = 0; p < g.N1; ++p) {
                    Vec2 x = g.point(p, q);
                    out.v[g.idx(p, q)] = std::polar(1.0, 0.5 * g.n * wedge(x, v)) *
                                         st.fetch_logical(f, p + dp, q + dq);
                }
            return out;
        };
        Eigen::VectorXcd Lu;
        st.laplacian(u.v, Lu);
        CField a = tshift(CField(g, Lu));
        CField shifted = tshift(u);
        Eigen::VectorXcd b;
        st.laplacian(shifted.v, b);
        CHECK((a.v - b).norm() < 1e-12 * Lu.norm());
    }
}

TEST_CASE("covariant gradient annihilates the ground state via L_-") {
    LatticeShape sq = normalize_shape(cd(0, 1));
    GridSpec g(sq, 1, 64, 64);
    CField psi0 = ThetaState::basis_element(sq, 1, 0).sample(g);
    CovariantStencil st(g);
    Eigen::VectorXcd gx, gy;
    st.grad_cart(psi0.v, gx, gy);
    Eigen::VectorXcd lminus = gx + cd(0, 1) * gy;
    CHECK(lminus.norm() / psi0.v.norm() <= 1e-8);
}

TEST_CASE("covariant gradient is gauge covariant") {
    LatticeShape sq = normalize_shape(cd(0, 1));
    GridSpec g(sq, 1, 64, 64);
    SpectralOps sp(g);
    CField psi0 = ThetaState::basis_element(sq, 1, 0).sample(g);
    CovariantStencil st(g);

    Vec2 b1 = Vec2{g.shape.t2.y, -g.shape.t2.x} * (kTwoPi / g.shape.cell_area);
    auto eta = [&](Vec2 x) { return 0.15 * std::sin(b1.x * x.x + b1.y * x.y + 0.4); };
    auto geta = [&](Vec2 x) {
        double c = 0.15 * std::cos(b1.x * x.x + b1.y * x.y + 0.4);
        return Vec2{c * b1.x, c * b1.y};
    };

    Eigen::VectorXcd gx, gy, hx, hy;
    st.grad_cart(psi0.v, gx, gy);  // a = 0

    CField chi(g);
    for (int q = 0; q < g.N2; ++q)
        for (int p = 0; p < g.N1; ++p) {
            Vec2 x = g.point(p, q);
            chi.v[g.idx(p, q)] = std::polar(1.0, eta(x)) * psi0.v[g.idx(p, q)];
        }
    st.grad_cart(chi.v, hx, hy);
    double worst = 0.0;
    for (int q = 0; q < g.N2; ++q)
        for (int p = 0; p < g.N1; ++p) {
            Vec2 x = g.point(p, q);
            Vec2 a2 = geta(x);  // transformed gauge perturbation
            int i = g.idx(p, q);
            cd dx0 = gx[i], dy0 = gy[i];
            cd dx1 = hx[i] - cd(0, 1) * a2.x * chi.v[i];
            cd dy1 = hy[i] - cd(0, 1) * a2.y * chi.v[i];
            worst = std::max(worst, std::abs(std::abs(dx1) - std::abs(dx0)));
            worst = std::max(worst, std::abs(std::abs(dy1) - std::abs(dy0)));
        }
    CHECK(worst <= 1e-9);
}

TEST_CASE("sampled constants violate quasi-periodicity, theta satisfies it") {
    LatticeShape sq = normalize_shape(cd(0, 1));
    GridSpec g(sq, 1, 16, 16);
    double bad = quasiperiodicity_residual(g, [](Vec2) { return cd(1.0, 0.0); });
    CHECK(bad > 0.5);

    ThetaState ts = ThetaState::basis_element(sq, 1, 0);
    double good = quasiperiodicity_residual(g, [&](Vec2 x) { return ts.eval(x); });
    CHECK(good <= 1e-10 * 1.1);  // max |psi0| ~ 1.09
}

TEST_CASE("spectral derivative and Poisson inverse are mode-exact") {
    GridSpec g(normalize_shape(cd(0.4, 1.3)), 1, 24, 16);
    SpectralOps sp(g);
    Vec2 gv = sp.gvec(5, 11);
    RField f = sample_real(g, [&](Vec2 x) { return std::cos(gv.x * x.x + gv.y * x.y); });
    RField lap = sp.laplacian(f);
    double g2 = gv.x * gv.x + gv.y * gv.y;
    CHECK((lap.v + g2 * f.v).cwiseAbs().maxCoeff() < 1e-10 * g2);

    RField inv = sp.inv_laplacian(lap);
    CHECK((inv.v - f.v).cwiseAbs().maxCoeff() < 1e-12);

    RField h = sample_real(g, [&](Vec2 x) { return std::sin(gv.x * x.x + gv.y * x.y); });
    VField a = sp.curl_star(h);
    RField curla = sp.curl(a);
    RField mlap = sp.laplacian(h);
    CHECK((curla.v + mlap.v).cwiseAbs().maxCoeff() < 1e-10 * g2);
    CHECK(sp.div(a).v.cwiseAbs().maxCoeff() < 1e-11 * std::sqrt(g2));
}

TEST_CASE("magnetic translation by a lattice vector reproduces the wrap phase") {
    LatticeShape sq = normalize_shape(cd(0, 1));
    GridSpec g(sq, 1, 32, 32);
    CField psi0 = ThetaState::basis_element(sq, 1, 0).sample(g);
    CovariantStencil st(g);
    CField tr = st.translate(psi0, g.shape.t1);
    double worst = 0.0;
    for (int q = 0; q < g.N2; ++q)
        for (int p = 0; p < g.N1; ++p) {
            Vec2 x = g.point(p, q);
            cd expect = std::polar(1.0, 0.5 * wedge(g.shape.t1, x)) * psi0.v[g.idx(p, q)];
            worst = std::max(worst, std::abs(tr.v[g.idx(p, q)] - expect));
        }
    CHECK(worst <= 1e-9);
}

TEST_CASE("sub-grid magnetic translation matches direct evaluation") {
    LatticeShape hex = normalize_shape(tau_hex());
    GridSpec g(hex, 1, 48, 48);
    ThetaState ts = ThetaState::basis_element(hex, 1, 0);
    CField psi0 = ts.sample(g);
    CovariantStencil st(g);
    Vec2 l = g.shape.t1 * 0.137 + g.shape.t2 * (-0.261);
    CField tr = st.translate(psi0, l);
    double worst = 0.0;
    for (int q = 0; q < g.N2; q += 3)
        for (int p = 0; p < g.N1; p += 3) {
            Vec2 x = g.point(p, q);
            cd expect = ts.eval({x.x + l.x, x.y + l.y});
            worst = std::max(worst, std::abs(tr.v[g.idx(p, q)] - expect));
        }
    CHECK(worst <= 1e-9);
}

TEST_CASE("lattice-preserving rotations act by exact index permutation") {
    LatticeShape sq = normalize_shape(cd(0, 1));
    GridSpec g(sq, 1, 16, 16);
    CField psi0 = ThetaState::basis_element(sq, 1, 0).sample(g);
    CovariantStencil st(g);
    CField rot = st.rotate90(psi0);
    // exact commutation with the Laplacian (permutation plus phases)
    Eigen::VectorXcd Lp, Lr;
    st.laplacian(psi0.v, Lp);
    st.laplacian(rot.v, Lr);
    CField rotLp = st.rotate90(CField(g, Lp));
    CHECK((Lr - rotLp.v).norm() <= 1e-12 * Lp.norm());
    CHECK_THROWS(st.rotate60(psi0));
}
