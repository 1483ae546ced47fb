#include "glv/operators.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace glv {

IterStats conjugate_gradient(const ApplyFn& op, const Eigen::VectorXcd& b, Eigen::VectorXcd& x,
                             double rtol, int maxit, const ApplyFn& precond) {
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        x.setZero(b.size());
        return {0, 0.0};
    }
    if (x.size() != b.size()) x = Eigen::VectorXcd::Zero(b.size());

    Eigen::VectorXcd r(b.size()), z(b.size()), p(b.size()), Ap(b.size());
    op(x, Ap);
    r = b - Ap;
    if (precond)
        precond(r, z);
    else
        z = r;
    p = z;
    cd rz = r.dot(z);
    IterStats st;
    for (int it = 0; it < maxit; ++it) {
        op(p, Ap);
        cd pAp = p.dot(Ap);
        cd alpha = rz / pAp;
        x += alpha * p;
        r -= alpha * Ap;
        st.iterations = it + 1;
        st.residual = r.norm() / bnorm;
        if (st.residual <= rtol) return st;
        if (precond)
            precond(r, z);
        else
            z = r;
        cd rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    throw ConvergenceError("conjugate gradient failed to converge", st.residual, st.iterations);
}

SpectralPrecond::SpectralPrecond(const CovariantStencil& st, double shift) : sp_(st.grid()) {
    const GridSpec& g = st.grid();
    const int N1 = g.N1, N2 = g.N2;
    inv_.resize(g.size());
    // symbols of the 1-D stencils in index units
    auto d1sym = [&](double th, int order) {
        static const int dummy = 0;
        (void)dummy;
        std::vector<double> c;
        switch (order) {
            case 2: c = {0.5}; break;
            case 4: c = {2.0 / 3, -1.0 / 12}; break;
            case 6: c = {3.0 / 4, -3.0 / 20, 1.0 / 60}; break;
            default: c = {4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280}; break;
        }
        double s = 0.0;
        for (size_t k = 0; k < c.size(); ++k) s += 2.0 * c[k] * std::sin((k + 1) * th);
        return s;
    };
    auto d2sym = [&](double th, int order) {
        std::vector<double> c0;
        switch (order) {
            case 2: c0 = {-2.0, 1.0}; break;
            case 4: c0 = {-5.0 / 2, 4.0 / 3, -1.0 / 12}; break;
            case 6: c0 = {-49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90}; break;
            default: c0 = {-205.0 / 72, 8.0 / 5, -1.0 / 5, 8.0 / 315, -1.0 / 560}; break;
        }
        double s = c0[0];
        for (size_t k = 1; k < c0.size(); ++k) s += 2.0 * c0[k] * std::cos(double(k) * th);
        return -s;  // symbol of -d2 (positive)
    };
    const int order = st.order();
    for (int a2 = 0; a2 < N2; ++a2)
        for (int a1 = 0; a1 < N1; ++a1) {
            double th1 = kTwoPi * a1 / N1, th2 = kTwoPi * a2 / N2;
            double S = st.G11() * d2sym(th1, order) + st.G22() * d2sym(th2, order) +
                       2.0 * st.G12() * d1sym(th1, order) * d1sym(th2, order);
            inv_[g.idx(a1, a2)] = 1.0 / (std::max(S, 0.0) + shift);
        }
}

void SpectralPrecond::apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
    Eigen::VectorXcd fh = sp_.forward(in);
    for (int i = 0; i < fh.size(); ++i) fh[i] *= inv_[i];
    out = sp_.backward(fh);
}

MagneticLaplacian::MagneticLaplacian(const GridSpec& g, int order)
    : g_(g), st_(g, order), prec_(st_, double(g.n)) {}

void MagneticLaplacian::apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
    st_.laplacian(in, out);
}

IterStats MagneticLaplacian::solve(const Eigen::VectorXcd& b, Eigen::VectorXcd& x, double rtol,
                                   int maxit) const {
    ApplyFn op = [this](const Eigen::VectorXcd& v, Eigen::VectorXcd& w) { st_.laplacian(v, w); };
    ApplyFn pc = [this](const Eigen::VectorXcd& v, Eigen::VectorXcd& w) { prec_.apply(v, w); };
    return conjugate_gradient(op, b, x, rtol, maxit, pc);
}

std::vector<EigPair> MagneticLaplacian::eigs_lowest(int k, double restol, unsigned seed) const {
    const int dim = g_.size();
    if (k < 1 || k > 20) throw std::invalid_argument("eigs_lowest: k must be in 1..20");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<Eigen::VectorXcd> locked;
    std::vector<double> locked_vals;

    auto orth_against = [&](Eigen::VectorXcd& w, const std::vector<Eigen::VectorXcd>& basis) {
        for (const auto& u : basis) w -= u.dot(w) * u;
    };

    const int m_max = std::min(dim, 48 + 8 * k);
    int outer = 0;
    while (int(locked.size()) < k) {
        if (++outer > 2 * k + 8)
            throw ConvergenceError("eigs_lowest: deflated restarts exhausted", 0.0, outer);

        Eigen::VectorXcd v(dim);
        for (int i = 0; i < dim; ++i) v[i] = cd(gauss(rng), gauss(rng));
        orth_against(v, locked);
        v.normalize();

        // Lanczos on L^{-1} with full reorthogonalization and deflation
        std::vector<Eigen::VectorXcd> V;
        std::vector<double> alpha, beta;
        Eigen::VectorXcd w = Eigen::VectorXcd::Zero(dim);
        int m = 0;
        for (int j = 0; j < m_max; ++j) {
            V.push_back(v);
            solve(V[j], w, 1e-13, 40000);
            orth_against(w, locked);
            if (j > 0) w -= beta[j - 1] * V[j - 1];
            double a = std::real(V[j].dot(w));
            w -= a * V[j];
            // full reorthogonalization (twice)
            for (int pass = 0; pass < 2; ++pass) orth_against(w, V);
            alpha.push_back(a);
            double b = w.norm();
            m = j + 1;
            if (b < 1e-13) break;
            beta.push_back(b);
            v = w / b;
        }

        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            T(i, i) = alpha[i];
            if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);

        // Ritz pairs of L^{-1}: largest theta <-> smallest eigenvalue of L.
        // Lock strictly in ascending L-eigenvalue order and stop at the first
        // pair that fails even after an inverse-iteration polish; a skipped
        // low pair must not be overtaken by a higher one.
        int locked_before = int(locked.size());
        Eigen::VectorXcd Ly(dim), tmp(dim);
        for (int idx = m - 1; idx >= 0 && int(locked.size()) < k; --idx) {
            double theta = es.eigenvalues()[idx];
            if (theta <= 0.0) break;
            Eigen::VectorXcd y = Eigen::VectorXcd::Zero(dim);
            for (int i = 0; i < m; ++i) y += es.eigenvectors()(i, idx) * V[i];
            orth_against(y, locked);
            double yn = y.norm();
            if (yn < 0.1) continue;  // collapsed onto locked space
            y /= yn;
            apply(y, Ly);
            double lam = std::real(y.dot(Ly));
            double res = (Ly - lam * y).norm();
            for (int polish = 0; polish < 3 && res > restol * std::max(1.0, lam); ++polish) {
                tmp.setZero();
                solve(y, tmp, 1e-13, 40000);
                orth_against(tmp, locked);
                tmp.normalize();
                y = tmp;
                apply(y, Ly);
                lam = std::real(y.dot(Ly));
                res = (Ly - lam * y).norm();
            }
            if (res <= restol * std::max(1.0, lam)) {
                locked.push_back(y);
                locked_vals.push_back(lam);
            } else {
                break;
            }
        }
        if (int(locked.size()) == locked_before)
            throw ConvergenceError("eigs_lowest: Lanczos run produced no converged pair",
                                   0.0, m);
    }

    // sort ascending and fix phases deterministically
    std::vector<int> order(locked.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return locked_vals[a] < locked_vals[b]; });
    std::vector<EigPair> out;
    const double wq = std::sqrt(g_.quad_weight);
    for (int i = 0; i < k; ++i) {
        EigPair ep{locked_vals[order[i]], locked[order[i]]};
        int imax = 0;
        double best = -1.0;
        for (int j = 0; j < ep.vector.size(); ++j) {
            double a = std::abs(ep.vector[j]);
            if (a > best) {
                best = a;
                imax = j;
            }
        }
        cd ph = ep.vector[imax] / std::abs(ep.vector[imax]);
        ep.vector /= ph;
        ep.vector /= wq;  // unit norm in the quadrature inner product
        out.push_back(std::move(ep));
    }
    return out;
}

CField LadderOperators::apply(const CField& v, int sign) const {
    require_same_grid(v.grid, st_.grid());
    CField out(v.grid);
    st_.ladder(v.v, out.v, sign);
    return out;
}

StreamSolveResult solve_m_plus_density(const RField& rho, const VField& J, double rtol,
                                       int maxit) {
    const GridSpec& g = rho.grid;
    require_same_grid(g, J.grid);
    SpectralOps sp(g);

    RField curlJ = sp.curl(J);
    curlJ.v.array() -= curlJ.v.mean();

    const int n = g.size();
    auto to_c = [](const Eigen::VectorXd& r) { return Eigen::VectorXcd(r.cast<cd>()); };

    ApplyFn op = [&](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
        RField h(g, in.real());
        h.v.array() -= h.v.mean();
        RField bi = sp.laplacian(h);
        bi = sp.laplacian(bi);
        VField a = sp.curl_star(h);
        a.x.array() *= rho.v.array();
        a.y.array() *= rho.v.array();
        RField c = sp.curl(a);
        Eigen::VectorXd res = bi.v + c.v;
        res.array() -= res.mean();
        out = to_c(res);
    };
    ApplyFn pc = [&](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
        RField r(g, in.real());
        out = to_c(sp.inv_biharmonic(r).v);
    };

    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
    IterStats st;
    try {
        st = conjugate_gradient(op, to_c(curlJ.v), x, rtol, maxit, pc);
    } catch (const ConvergenceError& e) {
        throw ConvergenceError("(M + |psi|^2) solve failed: " + std::string(e.what()),
                               e.residual, e.iterations);
    }
    RField h(g, x.real());
    h.v.array() -= h.v.mean();
    return {std::move(h), st};
}

double m_plus_density_residual(const RField& rho, const VField& J, const RField& h) {
    const GridSpec& g = rho.grid;
    SpectralOps sp(g);
    RField bi = sp.laplacian(h);
    bi = sp.laplacian(bi);
    VField a = sp.curl_star(h);
    a.x.array() *= rho.v.array();
    a.y.array() *= rho.v.array();
    RField c = sp.curl(a);
    RField curlJ = sp.curl(J);
    RField res(g);
    res.v = bi.v + c.v - curlJ.v;
    res.v.array() -= res.v.mean();
    return norm_l2(res);
}

}  // namespace glv
