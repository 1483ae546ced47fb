#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "glv/operators.hpp"
#include "glv/theta.hpp"
#include "support.hpp"

using namespace glv;
using namespace glv::testsup;

TEST_CASE("coefficient recursion reproduces the n=1 closed form") {
    // c_0 = 1 => c_k = e^{i pi tau k^2}; compare the series value against an
    // independent direct summation
    cd tau(0.31, 1.07);
    LatticeShape s = shape_from_tau_unchecked(tau);
    ThetaState ts = ThetaState::basis_element(s, 1, 0, 24);
    Vec2 x{0.37, 0.82};
    double beta = std::sqrt(kTwoPi * tau.imag());
    cd direct = 0.0;
    for (int k = -24; k <= 24; ++k) {
        cd ck = std::exp(cd(0, 1) * kPi * tau * double(k) * double(k));
        direct += ck * std::exp(cd(0, 0.5) * x.y * cd(x.x, x.y) +
                                cd(0, double(k) * beta) * cd(x.x, x.y));
    }
    CHECK(std::abs(ts.eval(x) - direct) < 1e-13 * std::abs(direct));
}

TEST_CASE("value at the origin for the square lattice is theta3(0, e^{-pi})") {
    LatticeShape sq = normalize_shape(cd(0, 1));
    ThetaState ts = ThetaState::basis_element(sq, 1, 0, 20);
    // independent oracle: sum_k e^{-pi k^2}
    double oracle = 0.0;
    for (int k = -20; k <= 20; ++k) oracle += std::exp(-kPi * k * k);
    CHECK(std::abs(ts.eval({0, 0}) - oracle) < 1e-13);
    CHECK(oracle == doctest::Approx(1.0864348112).epsilon(1e-9));
}

TEST_CASE("truncation is stable: K=20 vs K=30") {
    LatticeShape hex = normalize_shape(tau_hex());
    GridSpec g(hex, 1, 16, 16);
    CField a = ThetaState::basis_element(hex, 1, 0, 20).sample(g);
    CField b = ThetaState::basis_element(hex, 1, 0, 30).sample(g);
    double peak = a.v.cwiseAbs().maxCoeff();
    CHECK((a.v - b.v).cwiseAbs().maxCoeff() <= 1e-13 * peak);
}

TEST_CASE("stencil residual of (L - n) psi0 meets the contract") {
    LatticeShape sq = normalize_shape(cd(0, 1));
    GridSpec g(sq, 1, 64, 64);
    CField psi0 = ThetaState::basis_element(sq, 1, 0, 20).sample(g);
    MagneticLaplacian L(g);
    Eigen::VectorXcd Lp;
    L.apply(psi0.v, Lp);
    CHECK((Lp - psi0.v).norm() / psi0.v.norm() <= 1e-6);
}

TEST_CASE("theta basis spans the numeric null cluster") {
    for (cd tau : {cd(0, 1), tau_hex()}) {
        LatticeShape s = normalize_shape(tau);
        GridSpec g(s, 1, 48, 48);
        auto basis = null_basis(s, 1, g);
        MagneticLaplacian L(g);
        auto eig = L.eigs_lowest(1);
        CField ground(g, eig[0].vector);
        double overlap = std::abs(dotc(basis[0], ground)) / norm_l2(basis[0]);
        CHECK(overlap >= 0.999);
    }
}

TEST_CASE("two-dimensional null space for n = 2") {
    LatticeShape sq = normalize_shape(cd(0, 1));
    GridSpec g(sq, 2, 32, 32);
    auto basis = null_basis(sq, 2, g);
    REQUIRE(basis.size() == 2);
    Eigen::Matrix2cd gram;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            gram(i, j) = dotc(basis[i], basis[j]) / (norm_l2(basis[i]) * norm_l2(basis[j]));
    CHECK(std::abs(gram.determinant()) > 0.3);
    // both basis fields annihilated by L - 2
    MagneticLaplacian L(g);
    for (auto& b : basis) {
        Eigen::VectorXcd Lb;
        L.apply(b.v, Lb);
        CHECK((Lb - 2.0 * b.v).norm() / b.v.norm() < 1e-6);
    }
}

TEST_CASE("lowest-Landau-level current identity") {
    LatticeShape sq = normalize_shape(cd(0, 1));
    GridSpec g(sq, 1, 64, 64);
    CField psi0 = ThetaState::basis_element(sq, 1, 0).sample(g);
    CHECK(lll_current_identity_residual(psi0) <= 1e-6);

    // homogeneity: scaling psi0 leaves the relative residual unchanged
    CField scaled(g, Eigen::VectorXcd(2.0 * psi0.v));
    CHECK(lll_current_identity_residual(scaled) ==
          doctest::Approx(lll_current_identity_residual(psi0)).epsilon(1e-8));

    // negative control: the first excited state violates the identity
    MagneticLaplacian L(g);
    auto eig = L.eigs_lowest(2);
    CField excited(g, eig[1].vector);
    CHECK(lll_current_identity_residual(excited) > 0.1);
}

TEST_CASE("quasi-periodicity residual of the sampled series") {
    LatticeShape hex = normalize_shape(tau_hex());
    GridSpec g(hex, 1, 24, 24);
    ThetaState ts = ThetaState::basis_element(hex, 1, 0);
    CField psi0 = ts.sample(g);
    double peak = psi0.v.cwiseAbs().maxCoeff();
    CHECK(quasiperiodicity_residual(g, [&](Vec2 x) { return ts.eval(x); }) <= 1e-10 * peak);
}

TEST_CASE("one flux quantum means one zero per cell") {
    for (cd tau : {cd(0, 1), tau_hex()}) {
        LatticeShape s = normalize_shape(tau);
        GridSpec g(s, 1, 32, 32);
        CField psi0 = ThetaState::basis_element(s, 1, 0).sample(g);
        WindingCount wc = count_zeros(psi0);
        CHECK(wc.total == 1);
        CHECK(wc.plaquettes == 1);
    }
    // n = 2 carries two quanta
    LatticeShape sq = normalize_shape(cd(0, 1));
    GridSpec g2(sq, 2, 32, 32);
    CField psi = ThetaState::basis_element(sq, 2, 0).sample(g2);
    CHECK(count_zeros(psi).total == 2);
}

TEST_CASE("invalid shapes are rejected") {
    LatticeShape sq = normalize_shape(cd(0, 1));
    CHECK_THROWS_AS(ThetaState(sq, 0, {}, 20), std::invalid_argument);
    CHECK_THROWS_AS(ThetaState(sq, 2, {cd(1, 0)}, 20), std::invalid_argument);
}
