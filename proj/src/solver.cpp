#include "glv/solver.hpp"

#include <cmath>

#include "glv/theta.hpp"

namespace glv {

namespace {

// Restart-free GMRES with right preconditioning on packed real vectors.
struct GmresStats {
    int iterations = 0;
    double relres = 0.0;
};

using RealOp = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

GmresStats gmres(const RealOp& A, const RealOp& M, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                 double rtol, int maxit) {
    const double bnorm = b.norm();
    GmresStats st;
    if (bnorm == 0.0) {
        x.setZero(b.size());
        return st;
    }
    std::vector<Eigen::VectorXd> V;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(maxit + 1, maxit);
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(maxit), sn = Eigen::VectorXd::Zero(maxit);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(maxit + 1);
    V.push_back(b / bnorm);
    g[0] = bnorm;
    int k = 0;
    for (; k < maxit; ++k) {
        Eigen::VectorXd w = A(M(V[k]));
        for (int i = 0; i <= k; ++i) {
            H(i, k) = w.dot(V[i]);
            w -= H(i, k) * V[i];
        }
        double hnorm = w.norm();
        H(k + 1, k) = hnorm;
        if (hnorm > 0) V.push_back(w / hnorm);
        // apply accumulated Givens rotations
        for (int i = 0; i < k; ++i) {
            double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
            H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
            H(i, k) = t;
        }
        double denom = std::hypot(H(k, k), H(k + 1, k));
        cs[k] = H(k, k) / denom;
        sn[k] = H(k + 1, k) / denom;
        H(k, k) = denom;
        H(k + 1, k) = 0.0;
        g[k + 1] = -sn[k] * g[k];
        g[k] = cs[k] * g[k];
        st.relres = std::abs(g[k + 1]) / bnorm;
        st.iterations = k + 1;
        if (st.relres <= rtol || hnorm == 0.0) {
            ++k;
            break;
        }
    }
    // back substitution
    Eigen::VectorXd y = Eigen::VectorXd::Zero(k);
    for (int i = k - 1; i >= 0; --i) {
        double s = g[i];
        for (int j = i + 1; j < k; ++j) s -= H(i, j) * y[j];
        y[i] = s / H(i, i);
    }
    Eigen::VectorXd u = Eigen::VectorXd::Zero(b.size());
    for (int i = 0; i < k; ++i) u += y[i] * V[i];
    x = M(u);
    return st;
}

}  // namespace

GlSolver::GlSolver(const LatticeShape& shape, double kappa, int N, int K, int order)
    : g_(shape, 1, N, N),
      kappa_(kappa),
      st_(g_, order),
      sp_(g_),
      L_(g_, order),
      psi_prec_(st_, 1.0),
      e0_(g_) {
    CField raw = ThetaState::basis_element(shape, 1, 0, K).sample(g_);
    double n2 = integrate_abs2(raw);
    e0_ = CField(g_, raw.v / std::sqrt(n2));
    gprime0_ = g_lambda_prime0(kappa_, e0_);
}

double GlSolver::g_lambda_prime0(double kappa, const CField& psi0) {
    double N2 = integrate_abs2(psi0);
    double N4 = integrate_abs4(psi0);
    return (kappa * kappa - 0.5) * N4 / N2 + N2 / (4.0 * kPi);
}

CField GlSolver::psi0_normalized(const LatticeShape& shape, double kappa, const GridSpec& grid,
                                 int K) {
    CField raw = ThetaState::basis_element(shape, 1, 0, K).sample(grid);
    double N2 = integrate_abs2(raw), N4 = integrate_abs4(raw);
    double beta_int = N4 / (N2 * N2);
    double k2 = kappa * kappa;
    double denom = 1.0 + 4.0 * kPi * (k2 - 0.5) * beta_int;
    if (!(denom > 0.0))
        throw std::invalid_argument("psi0_normalized: nonpositive solvability denominator");
    double n2_target = 4.0 * kPi / (k2 * denom);
    return CField(grid, raw.v * std::sqrt(n2_target / N2));
}

VField GlSolver::current(const Eigen::VectorXcd& psi, const Eigen::VectorXcd& gx,
                         const Eigen::VectorXcd& gy) const {
    VField J(g_);
    for (int i = 0; i < g_.size(); ++i) {
        cd c = std::conj(psi[i]);
        J.x[i] = std::imag(c * gx[i]);
        J.y[i] = std::imag(c * gy[i]);
    }
    return J;
}

Eigen::VectorXcd GlSolver::advection(const VField& a, const Eigen::VectorXcd& psi,
                                     const Eigen::VectorXcd& gx,
                                     const Eigen::VectorXcd& gy) const {
    // i (a . D psi + D . (a psi)); equals 2 i a . D psi in the continuum for
    // div a = 0, but is exactly anti-Hermitian discretely
    Eigen::VectorXcd fx(g_.size()), fy(g_.size());
    for (int i = 0; i < g_.size(); ++i) {
        fx[i] = a.x[i] * psi[i];
        fy[i] = a.y[i] * psi[i];
    }
    Eigen::VectorXcd div;
    st_.div_cart(fx, fy, div);
    Eigen::VectorXcd out(g_.size());
    for (int i = 0; i < g_.size(); ++i)
        out[i] = cd(0, 1) * (a.x[i] * gx[i] + a.y[i] * gy[i] + div[i]);
    return out;
}

GaugePerturbation GlSolver::solve_a(const CField& psi, double rtol) const {
    require_same_grid(psi.grid, g_);
    Eigen::VectorXcd gx, gy;
    st_.grad_cart(psi.v, gx, gy);
    VField J = current(psi.v, gx, gy);
    RField rho(g_);
    for (int i = 0; i < g_.size(); ++i) rho.v[i] = std::norm(psi.v[i]);
    auto r = solve_m_plus_density(rho, J, rtol);
    GaugePerturbation ga{std::move(r.h), VField(g_)};
    ga.a = sp_.curl_star(ga.h);
    return ga;
}

CField GlSolver::F1(double lambda, const CField& psi, const GaugePerturbation& ga) const {
    Eigen::VectorXcd gx, gy, Lp;
    st_.grad_cart(psi.v, gx, gy);
    st_.laplacian(psi.v, Lp);
    Eigen::VectorXcd adv = advection(ga.a, psi.v, gx, gy);
    CField out(g_);
    const double k2 = kappa_ * kappa_;
    for (int i = 0; i < g_.size(); ++i) {
        double a2 = ga.a.x[i] * ga.a.x[i] + ga.a.y[i] * ga.a.y[i];
        double rho = std::norm(psi.v[i]);
        out.v[i] = Lp[i] - lambda * psi.v[i] + adv[i] + (a2 + k2 * rho) * psi.v[i];
    }
    return out;
}

CField GlSolver::F_residual(double lambda, const CField& psi) const {
    return F1(lambda, psi, solve_a(psi));
}

double GlSolver::F2_residual_norm(const CField& psi, const GaugePerturbation& ga) const {
    Eigen::VectorXcd gx, gy;
    st_.grad_cart(psi.v, gx, gy);
    VField J = current(psi.v, gx, gy);
    RField rho(g_);
    for (int i = 0; i < g_.size(); ++i) rho.v[i] = std::norm(psi.v[i]);
    return m_plus_density_residual(rho, J, ga.h);
}

// ---------------------------------------------------------------------------
// full Newton on (psi, h, lambda, omega) with amplitude/phase constraints

struct GlSolver::PackedState {
    const GlSolver& S;
    int M;
    explicit PackedState(const GlSolver& s) : S(s), M(s.g_.size()) {}
    int dim() const { return 3 * M + 2; }

    void unpack(const Eigen::VectorXd& X, Eigen::VectorXcd& psi, Eigen::VectorXd& h,
                double& lambda, double& omega) const {
        psi.resize(M);
        h.resize(M);
        for (int i = 0; i < M; ++i) psi[i] = cd(X[i], X[M + i]);
        h = X.segment(2 * M, M);
        lambda = X[3 * M];
        omega = X[3 * M + 1];
    }
    Eigen::VectorXd pack(const Eigen::VectorXcd& psi, const Eigen::VectorXd& h, double lambda,
                         double omega) const {
        Eigen::VectorXd X(dim());
        for (int i = 0; i < M; ++i) {
            X[i] = psi[i].real();
            X[M + i] = psi[i].imag();
        }
        X.segment(2 * M, M) = h;
        X[3 * M] = lambda;
        X[3 * M + 1] = omega;
        return X;
    }
    Eigen::VectorXd pack_res(const Eigen::VectorXcd& r1, const Eigen::VectorXd& r2, double r3,
                             double r4) const {
        Eigen::VectorXd R(dim());
        for (int i = 0; i < M; ++i) {
            R[i] = r1[i].real();
            R[M + i] = r1[i].imag();
        }
        R.segment(2 * M, M) = r2;
        R[3 * M] = r3;
        R[3 * M + 1] = r4;
        return R;
    }
};

BranchSample GlSolver::branch_point(double t, std::optional<BranchSample> warm) const {
    if (t <= 0.0) throw std::invalid_argument("branch_point: t must be positive");
    PackedState P(*this);
    const int M = g_.size();
    const double k2 = kappa_ * kappa_;

    Eigen::VectorXcd psi;
    Eigen::VectorXd h;
    double lambda, omega = 0.0;
    if (warm && warm->t > 0.0) {
        double s = t / warm->t;
        psi = warm->psi.v * s;
        h = warm->h.v * (s * s);
        lambda = 1.0 + (warm->lambda - 1.0) * s * s;
    } else {
        psi = t * e0_.v;
        CField pf(g_, psi);
        h = solve_a(pf).h.v;
        lambda = 1.0 + gprime0_ * t * t;
    }

    auto residual = [&](const Eigen::VectorXcd& ps, const Eigen::VectorXd& hh, double lam,
                        double om, double* out_norm) {
        RField hf(g_, hh);
        GaugePerturbation ga{hf, sp_.curl_star(hf)};
        CField pf(g_, ps);
        CField r1 = F1(lam, pf, ga);
        r1.v += cd(0, om) * ps;

        Eigen::VectorXcd gx, gy;
        st_.grad_cart(ps, gx, gy);
        VField J = current(ps, gx, gy);
        RField rho(g_);
        for (int i = 0; i < M; ++i) rho.v[i] = std::norm(ps[i]);
        RField bi = sp_.laplacian(hf);
        bi = sp_.laplacian(bi);
        VField rc = sp_.curl_star(hf);
        rc.x.array() *= rho.v.array();
        rc.y.array() *= rho.v.array();
        Eigen::VectorXd r2 = bi.v + sp_.curl(rc).v - sp_.curl(J).v;
        r2.array() += hh.mean();

        cd amp = g_.quad_weight * e0_.v.dot(ps);
        double r3 = amp.real() - t, r4 = amp.imag();
        if (out_norm) {
            double n1 = std::sqrt(g_.quad_weight) * r1.v.norm();
            double n2 = std::sqrt(g_.quad_weight) * r2.norm();
            *out_norm = std::max({n1, n2, std::abs(r3), std::abs(r4)});
        }
        return P.pack_res(r1.v, r2, r3, r4);
    };

    auto jvp = [&](const Eigen::VectorXcd& ps, const Eigen::VectorXd& hh, double lam, double om,
                   const Eigen::VectorXd& dX) {
        Eigen::VectorXcd dpsi;
        Eigen::VectorXd dh;
        double dlam, dom;
        P.unpack(dX, dpsi, dh, dlam, dom);

        RField hf(g_, hh), dhf(g_, dh);
        VField a = sp_.curl_star(hf), da = sp_.curl_star(dhf);
        Eigen::VectorXcd gx, gy, dgx, dgy, Lp;
        st_.grad_cart(ps, gx, gy);
        st_.grad_cart(dpsi, dgx, dgy);
        st_.laplacian(dpsi, Lp);
        Eigen::VectorXcd adv1 = advection(a, dpsi, dgx, dgy);
        Eigen::VectorXcd adv2 = advection(da, ps, gx, gy);

        Eigen::VectorXcd r1(M);
        for (int i = 0; i < M; ++i) {
            double a2 = a.x[i] * a.x[i] + a.y[i] * a.y[i];
            double rho = std::norm(ps[i]);
            cd ada = a.x[i] * da.x[i] + a.y[i] * da.y[i];
            r1[i] = Lp[i] - lam * dpsi[i] - dlam * ps[i] + adv1[i] + adv2[i] +
                    (a2 + 2.0 * k2 * rho) * dpsi[i] + k2 * ps[i] * ps[i] * std::conj(dpsi[i]) +
                    2.0 * ada * ps[i] + cd(0, om) * dpsi[i] + cd(0, dom) * ps[i];
        }

        RField rho(g_), drho(g_);
        for (int i = 0; i < M; ++i) {
            rho.v[i] = std::norm(ps[i]);
            drho.v[i] = 2.0 * std::real(std::conj(ps[i]) * dpsi[i]);
        }
        VField dJ(g_);
        for (int i = 0; i < M; ++i) {
            dJ.x[i] = std::imag(std::conj(dpsi[i]) * gx[i] + std::conj(ps[i]) * dgx[i]);
            dJ.y[i] = std::imag(std::conj(dpsi[i]) * gy[i] + std::conj(ps[i]) * dgy[i]);
        }
        RField bi = sp_.laplacian(dhf);
        bi = sp_.laplacian(bi);
        VField t1 = sp_.curl_star(dhf);
        t1.x.array() *= rho.v.array();
        t1.y.array() *= rho.v.array();
        VField t2 = sp_.curl_star(hf);
        t2.x.array() *= drho.v.array();
        t2.y.array() *= drho.v.array();
        Eigen::VectorXd r2 =
            bi.v + sp_.curl(t1).v + sp_.curl(t2).v - sp_.curl(dJ).v;
        r2.array() += dh.mean();

        cd amp = g_.quad_weight * e0_.v.dot(dpsi);
        return P.pack_res(r1, r2, amp.real(), amp.imag());
    };

    RealOp precond = [&](const Eigen::VectorXd& r) {
        Eigen::VectorXcd r1(M);
        for (int i = 0; i < M; ++i) r1[i] = cd(r[i], r[M + i]);
        Eigen::VectorXcd z1;
        psi_prec_.apply(r1, z1);
        RField r2(g_, Eigen::VectorXd(r.segment(2 * M, M)));
        Eigen::VectorXd z2 = sp_.inv_biharmonic_shifted(r2, 1.0).v;
        Eigen::VectorXd out(P.dim());
        for (int i = 0; i < M; ++i) {
            out[i] = z1[i].real();
            out[M + i] = z1[i].imag();
        }
        out.segment(2 * M, M) = z2;
        out[3 * M] = r[3 * M];
        out[3 * M + 1] = r[3 * M + 1];
        return out;
    };

    double rnorm = 0.0;
    Eigen::VectorXd R = residual(psi, h, lambda, omega, &rnorm);
    int newton = 0;
    for (; newton < 30 && rnorm > 1e-11; ++newton) {
        RealOp A = [&](const Eigen::VectorXd& d) { return jvp(psi, h, lambda, omega, d); };
        Eigen::VectorXd dX;
        gmres(A, precond, Eigen::VectorXd(-R), dX, 1e-8, 400);

        Eigen::VectorXcd psi_n;
        Eigen::VectorXd h_n;
        double lam_n, om_n, rn = 0.0;
        double step = 1.0;
        Eigen::VectorXd Rn;
        for (int bt = 0; bt < 6; ++bt) {
            Eigen::VectorXd Xn = P.pack(psi, h, lambda, omega) + step * dX;
            P.unpack(Xn, psi_n, h_n, lam_n, om_n);
            Rn = residual(psi_n, h_n, lam_n, om_n, &rn);
            if (rn < rnorm || rnorm < 1e-9) break;
            step *= 0.5;
        }
        psi = psi_n;
        h = h_n;
        lambda = lam_n;
        omega = om_n;
        R = Rn;
        rnorm = rn;
    }
    if (rnorm > 1e-10)
        throw ConvergenceError("branch Newton stalled at t=" + std::to_string(t), rnorm, newton);

    BranchSample s;
    s.t = t;
    s.lambda = lambda;
    s.mu = k2 * (lambda - 1.0) / lambda;
    s.psi = CField(g_, psi);
    s.h = RField(g_, h);
    s.h.v.array() -= s.h.v.mean();
    GaugePerturbation ga{s.h, sp_.curl_star(s.h)};
    double n1 = std::sqrt(g_.quad_weight) * F1(lambda, s.psi, ga).v.norm();
    double n2 = F2_residual_norm(s.psi, ga);
    s.residual = std::max(n1, n2);
    s.energy = energy(s.psi, ga, lambda);
    s.newton_iters = newton;
    return s;
}

std::vector<BranchSample> GlSolver::branch(const std::vector<double>& t_values) const {
    std::vector<BranchSample> out;
    std::optional<BranchSample> warm;
    for (double t : t_values) {
        if (t == 0.0) {
            BranchSample s;
            s.t = 0.0;
            s.lambda = 1.0;
            s.mu = 0.0;
            s.psi = CField(g_);
            s.h = RField(g_);
            GaugePerturbation ga{s.h, VField(g_)};
            s.energy = energy(s.psi, ga, 1.0);
            s.residual = 0.0;
            out.push_back(std::move(s));
            continue;
        }
        out.push_back(branch_point(t, warm));
        warm = out.back();
    }
    return out;
}

GlSolver::LsResult GlSolver::ls_solve_w(double lambda, double t) const {
    if (std::abs(lambda - 1.0) > 0.3 || std::abs(t) > 0.5)
        throw std::invalid_argument("ls_solve_w: outside the contraction gate");
    const int M = g_.size();

    auto projQ = [&](Eigen::VectorXcd& v) {
        cd c = g_.quad_weight * e0_.v.dot(v);
        v -= c * e0_.v;
    };

    Eigen::VectorXcd w = Eigen::VectorXcd::Zero(M);
    double qres = 0.0;
    int it = 0;
    CField psi(g_);
    GaugePerturbation ga{RField(g_), VField(g_)};
    for (; it < 80; ++it) {
        psi.v = t * e0_.v + w;
        ga = solve_a(psi);
        CField f = F1(lambda, psi, ga);
        Eigen::VectorXcd qf = f.v;
        projQ(qf);
        qres = std::sqrt(g_.quad_weight) * qf.norm();
        if (qres <= 1e-11) break;

        // Picard update: (L - lambda) w_new = -(Q nonlinearity), solved in Q
        Eigen::VectorXcd Lw;
        st_.laplacian(w, Lw);
        Eigen::VectorXcd rhs = -(qf - (Lw - lambda * w));
        projQ(rhs);
        ApplyFn op = [&](const Eigen::VectorXcd& v, Eigen::VectorXcd& out) {
            Eigen::VectorXcd vv = v;
            projQ(vv);
            st_.laplacian(vv, out);
            out -= lambda * vv;
            projQ(out);
        };
        ApplyFn pc = [&](const Eigen::VectorXcd& v, Eigen::VectorXcd& out) {
            psi_prec_.apply(v, out);
            projQ(out);
        };
        Eigen::VectorXcd wn = w;
        conjugate_gradient(op, rhs, wn, 1e-13, 4000, pc);
        projQ(wn);
        w = wn;
    }
    if (qres > 1e-11)
        throw ConvergenceError("ls_solve_w: Picard iteration stalled", qres, it);

    psi.v = t * e0_.v + w;
    ga = solve_a(psi);
    cd gamma = dotc(e0_, F1(lambda, psi, ga));
    LsResult r;
    r.w = CField(g_, w);
    r.gamma = gamma.real();
    r.gamma_imag = gamma.imag();
    r.q_residual = qres;
    r.iterations = it;
    return r;
}

double GlSolver::energy(const CField& psi, const VField& a, double lambda) const {
    require_same_grid(psi.grid, g_);
    Eigen::VectorXcd gx, gy;
    st_.grad_cart(psi.v, gx, gy);
    RField curla = sp_.curl(a);
    const double k2 = kappa_ * kappa_;
    double acc = 0.0;
    for (int i = 0; i < g_.size(); ++i) {
        cd dx = gx[i] - cd(0, 1) * a.x[i] * psi.v[i];
        cd dy = gy[i] - cd(0, 1) * a.y[i] * psi.v[i];
        double B = g_.n + curla.v[i];
        double rho = std::norm(psi.v[i]);
        double dev = rho - lambda / k2;
        acc += std::norm(dx) + std::norm(dy) + B * B + 0.5 * k2 * dev * dev;
    }
    return k2 * k2 / (kTwoPi * lambda * lambda) * g_.quad_weight * acc;
}

double GlSolver::energy(const CField& psi, const GaugePerturbation& ga, double lambda) const {
    return energy(psi, ga.a, lambda);
}

EnergyCurve GlSolver::energy_curve(const std::vector<double>& mu_values) const {
    const double k2 = kappa_ * kappa_;
    EnergyCurve ec;
    ec.tau = g_.shape.tau;
    ec.kappa = kappa_;
    double n4 = integrate_abs4(e0_);  // N2 = 1, so beta_int = N4
    double shape_term = 1.0 / (1.0 + 4.0 * kPi * (k2 - 0.5) * n4);
    ec.e2_published = k2 * k2 / (4.0 * kPi) - shape_term;
    ec.e2_exact = 1.0 - shape_term;

    std::optional<BranchSample> warm;
    for (double mu : mu_values) {
        if (!(mu > 0.0 && mu < k2))
            throw std::invalid_argument("energy_curve: mu must lie in (0, kappa^2)");
        double lam_target = k2 / (k2 - mu);
        double t0 = std::sqrt((lam_target - 1.0) / gprime0_);
        // secant on lambda(t) = lam_target
        double ta = t0, tb = t0 * 1.03;
        BranchSample sa = branch_point(ta, warm);
        warm = sa;
        BranchSample sb = branch_point(tb, warm);
        double fa = sa.lambda - lam_target, fb = sb.lambda - lam_target;
        for (int it = 0; it < 10 && std::abs(fb) > 1e-13 * lam_target; ++it) {
            double tn = tb - fb * (tb - ta) / (fb - fa);
            ta = tb;
            fa = fb;
            sa = sb;
            sb = branch_point(tn, sb);
            tb = tn;
            fb = sb.lambda - lam_target;
        }
        warm = sb;
        ec.mu.push_back(sb.mu);
        ec.energy.push_back(sb.energy);
    }
    auto fit = quadratic_fit(ec.mu, ec.energy);
    ec.e0_fit = fit[0];
    ec.e1_fit = fit[1];
    ec.e2_fit = fit[2];
    ec.fit_residual = fit[3];
    return ec;
}

GlSolver::FixedLambdaResult GlSolver::newton_fixed_lambda(double lambda, const CField& psi_init,
                                                          int max_newton) const {
    const int M = g_.size();
    const double k2 = kappa_ * kappa_;
    Eigen::VectorXcd psi = psi_init.v;
    Eigen::VectorXd h = solve_a(CField(g_, psi)).h.v;

    auto residual = [&](const Eigen::VectorXcd& ps, const Eigen::VectorXd& hh, double* nrm) {
        RField hf(g_, hh);
        GaugePerturbation ga{hf, sp_.curl_star(hf)};
        CField r1 = F1(lambda, CField(g_, ps), ga);
        Eigen::VectorXcd gx, gy;
        st_.grad_cart(ps, gx, gy);
        VField J = current(ps, gx, gy);
        RField rho(g_);
        for (int i = 0; i < M; ++i) rho.v[i] = std::norm(ps[i]);
        RField bi = sp_.laplacian(hf);
        bi = sp_.laplacian(bi);
        VField rc = sp_.curl_star(hf);
        rc.x.array() *= rho.v.array();
        rc.y.array() *= rho.v.array();
        Eigen::VectorXd r2 = bi.v + sp_.curl(rc).v - sp_.curl(J).v;
        r2.array() += hh.mean();
        if (nrm)
            *nrm = std::max(std::sqrt(g_.quad_weight) * r1.v.norm(),
                            std::sqrt(g_.quad_weight) * r2.norm());
        Eigen::VectorXd R(3 * M);
        for (int i = 0; i < M; ++i) {
            R[i] = r1.v[i].real();
            R[M + i] = r1.v[i].imag();
        }
        R.segment(2 * M, M) = r2;
        return R;
    };

    auto jvp = [&](const Eigen::VectorXcd& ps, const Eigen::VectorXd& hh,
                   const Eigen::VectorXd& dX) {
        Eigen::VectorXcd dpsi(M);
        for (int i = 0; i < M; ++i) dpsi[i] = cd(dX[i], dX[M + i]);
        Eigen::VectorXd dh = dX.segment(2 * M, M);
        RField hf(g_, hh), dhf(g_, dh);
        VField a = sp_.curl_star(hf), da = sp_.curl_star(dhf);
        Eigen::VectorXcd gx, gy, dgx, dgy, Lp;
        st_.grad_cart(ps, gx, gy);
        st_.grad_cart(dpsi, dgx, dgy);
        st_.laplacian(dpsi, Lp);
        Eigen::VectorXcd adv1 = advection(a, dpsi, dgx, dgy);
        Eigen::VectorXcd adv2 = advection(da, ps, gx, gy);
        Eigen::VectorXcd r1(M);
        for (int i = 0; i < M; ++i) {
            double a2 = a.x[i] * a.x[i] + a.y[i] * a.y[i];
            double rho = std::norm(ps[i]);
            cd ada = a.x[i] * da.x[i] + a.y[i] * da.y[i];
            r1[i] = Lp[i] - lambda * dpsi[i] + adv1[i] + adv2[i] +
                    (a2 + 2.0 * k2 * rho) * dpsi[i] + k2 * ps[i] * ps[i] * std::conj(dpsi[i]) +
                    2.0 * ada * ps[i];
        }
        RField rho(g_), drho(g_);
        for (int i = 0; i < M; ++i) {
            rho.v[i] = std::norm(ps[i]);
            drho.v[i] = 2.0 * std::real(std::conj(ps[i]) * dpsi[i]);
        }
        VField dJ(g_);
        for (int i = 0; i < M; ++i) {
            dJ.x[i] = std::imag(std::conj(dpsi[i]) * gx[i] + std::conj(ps[i]) * dgx[i]);
            dJ.y[i] = std::imag(std::conj(dpsi[i]) * gy[i] + std::conj(ps[i]) * dgy[i]);
        }
        RField bi = sp_.laplacian(dhf);
        bi = sp_.laplacian(bi);
        VField t1 = sp_.curl_star(dhf);
        t1.x.array() *= rho.v.array();
        t1.y.array() *= rho.v.array();
        VField t2 = sp_.curl_star(hf);
        t2.x.array() *= drho.v.array();
        t2.y.array() *= drho.v.array();
        Eigen::VectorXd r2 = bi.v + sp_.curl(t1).v + sp_.curl(t2).v - sp_.curl(dJ).v;
        r2.array() += dh.mean();
        Eigen::VectorXd R(3 * M);
        for (int i = 0; i < M; ++i) {
            R[i] = r1[i].real();
            R[M + i] = r1[i].imag();
        }
        R.segment(2 * M, M) = r2;
        return R;
    };

    RealOp precond = [&](const Eigen::VectorXd& r) {
        Eigen::VectorXcd r1(M);
        for (int i = 0; i < M; ++i) r1[i] = cd(r[i], r[M + i]);
        Eigen::VectorXcd z1;
        psi_prec_.apply(r1, z1);
        RField r2(g_, Eigen::VectorXd(r.segment(2 * M, M)));
        Eigen::VectorXd z2 = sp_.inv_biharmonic_shifted(r2, 1.0).v;
        Eigen::VectorXd out(3 * M);
        for (int i = 0; i < M; ++i) {
            out[i] = z1[i].real();
            out[M + i] = z1[i].imag();
        }
        out.segment(2 * M, M) = z2;
        return out;
    };

    double rnorm = 0.0;
    Eigen::VectorXd R = residual(psi, h, &rnorm);
    int it = 0;
    for (; it < max_newton && rnorm > 1e-11; ++it) {
        RealOp A = [&](const Eigen::VectorXd& d) { return jvp(psi, h, d); };
        Eigen::VectorXd dX;
        gmres(A, precond, Eigen::VectorXd(-R), dX, 1e-8, 400);
        double step = 1.0, rn = 0.0;
        Eigen::VectorXcd psi_n;
        Eigen::VectorXd h_n, Rn;
        for (int bt = 0; bt < 8; ++bt) {
            psi_n = psi;
            h_n = h;
            for (int i = 0; i < M; ++i) psi_n[i] += step * cd(dX[i], dX[M + i]);
            h_n += step * dX.segment(2 * M, M);
            Rn = residual(psi_n, h_n, &rn);
            if (rn < rnorm || rnorm < 1e-9) break;
            step *= 0.5;
        }
        psi = psi_n;
        h = h_n;
        R = Rn;
        rnorm = rn;
    }
    FixedLambdaResult res;
    res.psi = CField(g_, psi);
    res.h = RField(g_, h);
    res.residual = rnorm;
    res.iterations = it;
    res.converged = rnorm <= 1e-10;
    return res;
}

std::array<double, 4> quadratic_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3)
        throw std::invalid_argument("quadratic_fit: need at least 3 samples");
    const int n = int(x.size());
    double xs = 0.0;
    for (double v : x) xs = std::max(xs, std::abs(v));
    if (xs == 0.0) xs = 1.0;
    Eigen::MatrixXd A(n, 3);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
        double u = x[i] / xs;
        A(i, 0) = 1.0;
        A(i, 1) = u;
        A(i, 2) = u * u;
        b[i] = y[i];
    }
    Eigen::Vector3d c = (A.transpose() * A).ldlt().solve(A.transpose() * b);
    double res = (A * c - b).norm() / std::sqrt(double(n));
    return {c[0], c[1] / xs, c[2] / (xs * xs), res};
}

}  // namespace glv
