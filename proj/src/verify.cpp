#include "glv/verify.hpp"

#include <cmath>
#include <random>

#include "glv/abrikosov.hpp"
#include "glv/gauge.hpp"
#include "glv/operators.hpp"
#include "glv/solver.hpp"
#include "glv/theta.hpp"

namespace glv {

namespace {

// frozen oracle values (N = 256, K = 30 quadrature of the theta series)
constexpr double kBetaSquareOracle = 1.1803405990161;
constexpr double kBetaHexOracle = 1.1595952669640;

// random combination of the lowest few Landau levels L_+^k psi0: a smooth
// quasi-periodic section with spectrally small stencil error
CField random_smooth_section(const GridSpec& g, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    CField psi0 = ThetaState::basis_element(g.shape, g.n, 0).sample(g);
    CovariantStencil st(g);
    Eigen::VectorXcd level = psi0.v, acc = Eigen::VectorXcd::Zero(g.size());
    for (int k = 0; k <= 4; ++k) {
        acc += cd(gauss(rng), gauss(rng)) * level / level.norm();
        Eigen::VectorXcd next;
        st.ladder(level, next, +1);
        level = next;
    }
    CField out(g, acc);
    out.v /= norm_l2(out);
    return out;
}

void push(std::vector<CheckResult>& out, const std::string& name, double value, double bound,
          const std::string& note = "") {
    out.push_back({name, value <= bound, value, bound, note});
}

}  // namespace

std::vector<CheckResult> run_verify(const std::string& level, unsigned seed) {
    if (level != "quick" && level != "full")
        throw std::invalid_argument("verify level must be quick or full");
    const bool full = level == "full";
    std::vector<CheckResult> out;
    std::mt19937_64 rng(seed);

    // lattice: fundamental-domain reduction
    {
        std::uniform_real_distribution<double> ure(-3.0, 3.0), uim(0.05, 3.0);
        double worst_det = 0.0;
        bool all_in = true, idempotent = true;
        int reps = full ? 10000 : 2000;
        for (int i = 0; i < reps; ++i) {
            cd raw(ure(rng), uim(rng));
            LatticeShape s = normalize_shape(raw);
            all_in = all_in && in_fundamental_domain(s.tau, 1e-12);
            LatticeShape s2 = normalize_shape(s.tau);
            idempotent = idempotent && std::abs(s2.tau - s.tau) < 1e-13;
            ShearMap m(s.tau);
            worst_det = std::max(worst_det, std::abs(m.det() - 1.0));
        }
        push(out, "lattice.fundamental_domain", all_in && idempotent ? 0.0 : 1.0, 0.5);
        push(out, "lattice.shear_det", worst_det, 1e-13);
    }

    // stencil: Hermiticity and ladder identity on random smooth sections
    {
        GridSpec g(normalize_shape(cd(0.2, 1.1)), 1, 32, 32);
        CovariantStencil st(g);
        CField u = random_smooth_section(g, rng), v = random_smooth_section(g, rng);
        Eigen::VectorXcd Lu, Lv;
        st.laplacian(u.v, Lu);
        st.laplacian(v.v, Lv);
        cd lhs = g.quad_weight * u.v.dot(Lv), rhs = g.quad_weight * Lu.dot(v.v);
        push(out, "operators.self_adjoint", std::abs(lhs - rhs), 1e-12, "vs 1e-12*|u||v|");

        Eigen::VectorXcd lm;
        st.ladder(u.v, lm, -1);
        double lhs2 = g.quad_weight * lm.squaredNorm();
        cd rhs2 = g.quad_weight * u.v.dot(Lv = (Lu - double(g.n) * u.v));
        push(out, "operators.ladder_factorization", std::abs(lhs2 - rhs2.real()), 1e-7,
             "<L-u,L-u> vs <u,(L-n)u>");
    }

    // theta null space
    {
        LatticeShape sq = normalize_shape(cd(0, 1));
        GridSpec g(sq, 1, 32, 32);
        CField psi0 = ThetaState::basis_element(sq, 1, 0).sample(g);
        LadderOperators lad(g);
        double lres = norm_l2(lad.apply(psi0, -1)) / norm_l2(psi0);
        push(out, "theta.lowering_residual", lres, 1e-6);
        ThetaState ts = ThetaState::basis_element(sq, 1, 0);
        double qres = quasiperiodicity_residual(g, [&](Vec2 x) { return ts.eval(x); });
        double peak = psi0.v.cwiseAbs().maxCoeff();
        push(out, "theta.quasi_periodicity", qres / peak, 1e-10);
    }

    // operator spectrum (quick: n=1 at N=32; full: clusters n=1,2,3 at N=64)
    {
        GridSpec g(normalize_shape(cd(0, 1)), 1, 32, 32);
        MagneticLaplacian L(g);
        auto e = L.eigs_lowest(2);
        double err = std::max(std::abs(e[0].value - 1.0), std::abs(e[1].value - 3.0) / 3.0);
        push(out, "operators.spectrum_n1", err, 5e-3);
    }
    if (full) {
        for (int n = 1; n <= 3; ++n) {
            GridSpec g(normalize_shape(cd(0, 1)), n, 64, 64);
            MagneticLaplacian L(g);
            auto e = L.eigs_lowest(n + 1);
            double cluster = std::abs(e[n - 1].value - double(n)) / n;
            double gap = e[n].value - e[n - 1].value;
            push(out, "operators.null_cluster_n" + std::to_string(n),
                 cluster + (gap > n ? 0.0 : 1.0), 1e-2, "cluster at n, gap to 3n");
        }
    }

    // beta reference values
    {
        BetaOptions opt{128, 25};
        double bi = beta(cd(0, 1), opt).beta;
        double bh = beta(std::polar(1.0, kPi / 3.0), opt).beta;
        push(out, "abrikosov.beta_square", std::abs(bi - kBetaSquareOracle), 1e-5);
        push(out, "abrikosov.beta_hex", std::abs(bh - kBetaHexOracle), 1e-5);
    }
    if (full) {
        BetaOptions opt{256, 30};
        double bi = beta(cd(0, 1), opt).beta;
        double bh = beta(std::polar(1.0, kPi / 3.0), opt).beta;
        push(out, "abrikosov.beta_oracle_recompute",
             std::max(std::abs(bi - kBetaSquareOracle), std::abs(bh - kBetaHexOracle)), 1e-9);
    }

    // a(psi) properties and one branch point
    {
        LatticeShape sq = normalize_shape(cd(0, 1));
        GlSolver S(sq, std::sqrt(2.0), 32);
        CField psi(S.grid(), Eigen::VectorXcd(0.2 * S.psi0_unit().v));
        GaugePerturbation ga = S.solve_a(psi);
        CField psi_rot(S.grid(), Eigen::VectorXcd(std::polar(1.0, 1.3) * psi.v));
        GaugePerturbation ga2 = S.solve_a(psi_rot);
        push(out, "solver.a_gauge_invariance", norm_l2(RField(S.grid(), (ga.h.v - ga2.h.v))),
             1e-12, "a(e^{ia} psi) = a(psi)");
        CField zero(S.grid());
        push(out, "solver.a_of_zero", norm_l2(S.solve_a(zero).h), 1e-14);

        BranchSample bs = S.branch_point(0.1);
        push(out, "solver.branch_residual", bs.residual, 1e-10);
        double gp = GlSolver::g_lambda_prime0(S.kappa(), S.psi0_unit());
        push(out, "solver.branch_slope_sanity",
             std::abs((bs.lambda - 1.0) / (0.1 * 0.1) - gp) / gp, 2e-2);
    }
    if (full) {
        LatticeShape hex = normalize_shape(std::polar(1.0, kPi / 3.0));
        GlSolver S(hex, std::sqrt(2.0), 48);
        auto run = S.branch({0.05, 0.1, 0.15, 0.2});
        std::vector<double> x, y;
        for (auto& s : run) {
            x.push_back(s.t * s.t);
            y.push_back(s.lambda);
        }
        auto fit = quadratic_fit(x, y);
        double gp = GlSolver::g_lambda_prime0(S.kappa(), S.psi0_unit());
        push(out, "solver.branch_slope_fit", std::abs(fit[1] - gp) / gp, 1e-2);
        double lres = lll_current_identity_residual(S.psi0_unit());
        push(out, "theta.current_identity", lres, 1e-6);
    }

    // gauge round trip (pure gauge input)
    {
        LatticeShape sq = normalize_shape(cd(0, 1));
        GridSpec g(sq, 1, 32, 32);
        SpectralOps sp(g);
        CField psi0 = ThetaState::basis_element(sq, 1, 0).sample(g);
        RawLatticeState raw{g, CField(g), background_potential(g, 1), 0.0, 0.0};
        raw.psi = psi0;
        auto eta = [&](Vec2 x) {
            Vec2 b2{0.0, kTwoPi / g.shape.t2.y};
            return 0.3 * std::sin(b2.x * x.x + b2.y * x.y);
        };
        for (int q = 0; q < g.N2; ++q)
            for (int p = 0; p < g.N1; ++p) {
                Vec2 x = g.point(p, q);
                int i = g.idx(p, q);
                raw.psi.v[i] *= std::polar(1.0, eta(x));
                Vec2 b2{0.0, kTwoPi / g.shape.t2.y};
                double c = 0.3 * std::cos(b2.x * x.x + b2.y * x.y);
                raw.A.x[i] += c * b2.x;
                raw.A.y[i] += c * b2.y;
            }
        auto res = fix_gauge(raw);
        double anorm = norm_l2(res.gauge.h);
        RField d0(g), d1(g);
        for (int i = 0; i < g.size(); ++i) {
            d0.v[i] = std::norm(psi0.v[i]);
            d1.v[i] = std::norm(res.phi.v[i]);
        }
        RField d0t = sp.translate(d0, res.report.translation);
        push(out, "gauge.pure_gauge_a", anorm, 1e-9);
        push(out, "gauge.pure_gauge_density", (d0t.v - d1.v).cwiseAbs().maxCoeff(), 1e-9);
        push(out, "gauge.quasi_residual", res.report.quasi_residual, 1e-8);
    }

    return out;
}

}  // namespace glv
