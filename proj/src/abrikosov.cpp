#include "glv/abrikosov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <atomic>
#include <thread>

#include "glv/operators.hpp"
#include "glv/theta.hpp"

namespace glv {

namespace {

BetaResult beta_on_shape(const LatticeShape& shape, const BetaOptions& opt, bool flagged) {
    GridSpec grid(shape, 1, opt.N, opt.N);
    CField psi = ThetaState::basis_element(shape, 1, 0, opt.K).sample(grid);
    BetaResult r;
    r.tau = shape.tau;
    r.N2 = integrate_abs2(psi);
    r.N4 = integrate_abs4(psi);
    r.beta = shape.cell_area * r.N4 / (r.N2 * r.N2);
    r.N = opt.N;
    r.K = opt.K;
    r.was_normalized = flagged;
    return r;
}

}  // namespace

BetaResult beta(cd tau, const BetaOptions& opt) {
    bool inside = in_fundamental_domain(tau);
    LatticeShape s = normalize_shape(tau);
    return beta_on_shape(s, opt, !inside);
}

BetaResult beta_raw(cd tau, const BetaOptions& opt) {
    return beta_on_shape(shape_from_tau_unchecked(tau), opt, false);
}

namespace {

int scan_thread_count() {
    if (const char* env = std::getenv("GLV_THREADS")) {
        int k = std::atoi(env);
        if (k >= 1) return k;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? int(hw) : 1;
}

}  // namespace

BetaScan beta_scan(double re0, double re1, int nre, double im0, double im1, int nim,
                   const BetaOptions& opt) {
    if (nre < 1 || nim < 1 || re1 < re0 || im1 < im0)
        throw std::invalid_argument("beta_scan: empty range");
    std::vector<cd> taus;
    for (int j = 0; j < nim; ++j)
        for (int i = 0; i < nre; ++i) {
            double re = (nre == 1) ? re0 : re0 + (re1 - re0) * i / double(nre - 1);
            double im = (nim == 1) ? im0 : im0 + (im1 - im0) * j / double(nim - 1);
            if (in_fundamental_domain(cd(re, im), 1e-9)) taus.push_back(cd(re, im));
        }
    if (taus.empty()) throw std::invalid_argument("beta_scan: no fundamental-domain points");

    // each evaluation is pure; fan out over tau with deterministic ordering
    std::vector<BetaScanRow> rows(taus.size());
    int nthreads = std::min<int>(scan_thread_count(), int(taus.size()));
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int t = 0; t < nthreads; ++t)
        pool.emplace_back([&]() {
            for (size_t i = next++; i < taus.size(); i = next++) {
                BetaResult b = beta_raw(taus[i], opt);
                rows[i] = {taus[i].real(), taus[i].imag(), b.beta, b.N2, b.N4};
            }
        });
    for (auto& th : pool) th.join();

    BetaScan scan;
    scan.nre = nre;
    scan.nim = nim;
    scan.rows = std::move(rows);
    return scan;
}

Vec2 beta_gradient(cd tau, double step, const BetaOptions& opt) {
    double dre = (beta_raw(tau + cd(step, 0), opt).beta - beta_raw(tau - cd(step, 0), opt).beta) /
                 (2 * step);
    double dim = (beta_raw(tau + cd(0, step), opt).beta - beta_raw(tau - cd(0, step), opt).beta) /
                 (2 * step);
    return {dre, dim};
}

std::array<double, 3> beta_hessian(cd tau, double h, const BetaOptions& opt) {
    auto b = [&](double dre, double dim) { return beta_raw(tau + cd(dre, dim), opt).beta; };
    double b0 = b(0, 0);
    double hrr = (b(h, 0) - 2 * b0 + b(-h, 0)) / (h * h);
    double hii = (b(0, h) - 2 * b0 + b(0, -h)) / (h * h);
    double hri = (b(h, h) - b(h, -h) - b(-h, h) + b(-h, -h)) / (4 * h * h);
    return {hrr, hri, hii};
}

namespace {

// keep Nelder-Mead vertices in a sane band of the upper half-plane;
// re-normalize into the fundamental domain when they stray far out
cd confine(cd tau) {
    if (std::abs(tau.real()) <= 0.75 && tau.imag() >= 0.55 && tau.imag() <= 2.5) return tau;
    return normalize_shape(tau).tau;
}

cd reflect_canonical(cd tau) {
    cd t = normalize_shape(tau).tau;
    if (t.real() < 0.0) t = -std::conj(t);  // reflection symmetry of beta
    return t;
}

}  // namespace

MinimizeResult minimize_beta(cd start, double tol, const BetaOptions& opt) {
    auto f = [&](cd t) { return beta_raw(t, opt).beta; };

    std::array<cd, 3> v{start, start + cd(0.05, 0.0), start + cd(0.0, 0.05)};
    std::array<double, 3> fv{f(v[0]), f(v[1]), f(v[2])};
    int evals = 3;

    for (int it = 0; it < 200; ++it) {
        // order ascending
        std::array<int, 3> idx{0, 1, 2};
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
        std::array<cd, 3> nv{v[idx[0]], v[idx[1]], v[idx[2]]};
        std::array<double, 3> nf{fv[idx[0]], fv[idx[1]], fv[idx[2]]};
        v = nv;
        fv = nf;
        double size = std::max(std::abs(v[1] - v[0]), std::abs(v[2] - v[0]));
        if (size < 1e-8) break;

        cd centroid = 0.5 * (v[0] + v[1]);
        cd xr = confine(centroid + (centroid - v[2]));
        double fr = f(xr);
        ++evals;
        if (fr < fv[0]) {
            cd xe = confine(centroid + 2.0 * (centroid - v[2]));
            double fe = f(xe);
            ++evals;
            if (fe < fr) {
                v[2] = xe;
                fv[2] = fe;
            } else {
                v[2] = xr;
                fv[2] = fr;
            }
        } else if (fr < fv[1]) {
            v[2] = xr;
            fv[2] = fr;
        } else {
            cd xc = confine(centroid + 0.5 * (v[2] - centroid));
            double fc = f(xc);
            ++evals;
            if (fc < fv[2]) {
                v[2] = xc;
                fv[2] = fc;
            } else {
                v[1] = confine(v[0] + 0.5 * (v[1] - v[0]));
                v[2] = confine(v[0] + 0.5 * (v[2] - v[0]));
                fv[1] = f(v[1]);
                fv[2] = f(v[2]);
                evals += 2;
            }
        }
    }

    // Newton polish on the gradient (finite-difference derivatives)
    cd t = v[0];
    for (int it = 0; it < 8; ++it) {
        Vec2 g = beta_gradient(t, 1e-4, opt);
        double gn = std::hypot(g.x, g.y);
        if (gn < 0.05 * tol) break;
        auto H = beta_hessian(t, 2e-3, opt);
        double det = H[0] * H[2] - H[1] * H[1];
        if (std::abs(det) < 1e-12) break;
        double dre = (H[2] * g.x - H[1] * g.y) / det;
        double dim = (H[0] * g.y - H[1] * g.x) / det;
        double damp = std::min(1.0, 0.05 / std::max(std::abs(dre), std::abs(dim)));
        t -= damp * cd(dre, dim);
        if (!(t.imag() > 0.3)) throw std::runtime_error("minimize_beta: left the upper half-plane");
    }

    MinimizeResult r;
    r.tau_star = reflect_canonical(t);
    BetaResult b = beta_raw(r.tau_star, opt);
    r.beta_star = b.beta;
    Vec2 g = beta_gradient(r.tau_star, 1e-4, opt);
    r.grad_norm = std::hypot(g.x, g.y);
    r.iterations = evals;
    if (r.grad_norm > tol)
        throw ConvergenceError("minimize_beta: gradient norm above tolerance", r.grad_norm,
                               r.iterations);
    return r;
}

std::vector<cd> beta_critical_points(double re0, double re1, double im0, double im1, double tol,
                                     const BetaOptions& opt) {
    std::vector<cd> found;
    const int nseed_re = 5, nseed_im = 4;
    for (int j = 0; j < nseed_im; ++j)
        for (int i = 0; i < nseed_re; ++i) {
            cd t0(re0 + (re1 - re0) * (i + 0.5) / nseed_re,
                  im0 + (im1 - im0) * (j + 0.5) / nseed_im);
            if (std::norm(t0) < 0.92) continue;
            cd t = t0;
            bool ok = false;
            for (int it = 0; it < 14; ++it) {
                Vec2 g = beta_gradient(t, 1e-4, opt);
                double gn = std::hypot(g.x, g.y);
                if (gn < tol) {
                    ok = true;
                    break;
                }
                auto H = beta_hessian(t, 2e-3, opt);
                double det = H[0] * H[2] - H[1] * H[1];
                if (std::abs(det) < 1e-10) break;
                double dre = (H[2] * g.x - H[1] * g.y) / det;
                double dim = (H[0] * g.y - H[1] * g.x) / det;
                double step = std::hypot(dre, dim);
                double damp = (step > 0.08) ? 0.08 / step : 1.0;
                t -= damp * cd(dre, dim);
                if (!(t.imag() > 0.4) || std::abs(t.real()) > 1.0) break;
            }
            if (!ok) continue;
            // fold into the scanned window via the reflection representative
            cd c = t;
            if (c.real() < 0.0) c = -std::conj(c);
            if (c.real() < re0 - 0.02 || c.real() > re1 + 0.02 || c.imag() < im0 - 0.02 ||
                c.imag() > im1 + 0.02)
                continue;
            bool dup = false;
            for (cd& u : found)
                if (std::abs(u - c) < 0.02) dup = true;
            if (!dup) found.push_back(c);
        }
    std::sort(found.begin(), found.end(), [](cd a, cd b) { return a.real() < b.real(); });
    return found;
}

double e2_published(double kappa, const BetaResult& b) {
    return e2_published_from_beta(kappa, b.beta);
}

double e2_exact(double kappa, const BetaResult& b) { return e2_exact_from_beta(kappa, b.beta); }

double e2_published_from_beta(double kappa, double beta_avg) {
    double k2 = kappa * kappa;
    return k2 * k2 / (4.0 * kPi) - 1.0 / (1.0 + 2.0 * (k2 - 0.5) * beta_avg);
}

double e2_exact_from_beta(double kappa, double beta_avg) {
    double k2 = kappa * kappa;
    return 1.0 - 1.0 / (1.0 + 2.0 * (k2 - 0.5) * beta_avg);
}

}  // namespace glv
