#include "glv/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace glv {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// One cached plan pair per (N1, N2), per thread. fftw_execute_dft on a given
// plan with its own buffers is safe as long as plans are distinct per thread.
struct Plan2D {
    int N1 = 0, N2 = 0;
    fftw_complex* buf = nullptr;
    fftw_plan fwd = nullptr, bwd = nullptr;

    Plan2D(int N1_, int N2_) : N1(N1_), N2(N2_) {
        buf = fftw_alloc_complex(size_t(N1) * N2);
        std::lock_guard<std::mutex> lock(planner_mutex());
        // storage has p (length N1) fastest -> fftw dims (N2, N1)
        fwd = fftw_plan_dft_2d(N2, N1, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_2d(N2, N1, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~Plan2D() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(buf);
    }
    Plan2D(const Plan2D&) = delete;
    Plan2D& operator=(const Plan2D&) = delete;
};

Plan2D& get_plan(int N1, int N2) {
    thread_local std::map<std::pair<int, int>, std::unique_ptr<Plan2D>> cache;
    auto key = std::make_pair(N1, N2);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<Plan2D>(N1, N2)).first;
    return *it->second;
}

}  // namespace

SpectralOps::SpectralOps(const GridSpec& g) : g_(g) {
    // reciprocal basis from wedge(t1, t2) = cell_area
    double W = g.shape.cell_area;
    b1_ = Vec2{g.shape.t2.y, -g.shape.t2.x} * (kTwoPi / W);
    b2_ = Vec2{-g.shape.t1.y, g.shape.t1.x} * (kTwoPi / W);
    m1_.resize(g.N1);
    m2_.resize(g.N2);
    for (int a = 0; a < g.N1; ++a) m1_[a] = (a <= g.N1 / 2 - 1) ? a : a - g.N1;
    for (int a = 0; a < g.N2; ++a) m2_[a] = (a <= g.N2 / 2 - 1) ? a : a - g.N2;
}

Vec2 SpectralOps::gvec(int a1, int a2) const {
    return b1_ * double(m1_[a1]) + b2_ * double(m2_[a2]);
}

// |g|^2 with the b1.b2 cross term dropped on Nyquist lines: index (-N/2, m2)
// is its own Hermitian partner under m -> -m, so for real fields the symbol
// there must coincide with the one at (-N/2, -m2); averaging the pair cancels
// exactly the cross term and leaves all resolved modes untouched.
double SpectralOps::g2_sym(int a1, int a2) const {
    double m1 = m1_[a1], m2 = m2_[a2];
    bool ny = (m1_[a1] == -g_.N1 / 2) || (m2_[a2] == -g_.N2 / 2);
    double diag = m1 * m1 * b1_.dot(b1_) + m2 * m2 * b2_.dot(b2_);
    return ny ? diag : diag + 2.0 * m1 * m2 * b1_.dot(b2_);
}

Eigen::VectorXcd SpectralOps::forward(const Eigen::VectorXcd& f) const {
    auto& pl = get_plan(g_.N1, g_.N2);
    const int n = g_.size();
    for (int i = 0; i < n; ++i) {
        pl.buf[i][0] = f[i].real();
        pl.buf[i][1] = f[i].imag();
    }
    fftw_execute(pl.fwd);
    Eigen::VectorXcd out(n);
    const double s = 1.0 / n;
    for (int i = 0; i < n; ++i) out[i] = cd(pl.buf[i][0], pl.buf[i][1]) * s;
    return out;
}

Eigen::VectorXcd SpectralOps::backward(const Eigen::VectorXcd& fhat) const {
    auto& pl = get_plan(g_.N1, g_.N2);
    const int n = g_.size();
    for (int i = 0; i < n; ++i) {
        pl.buf[i][0] = fhat[i].real();
        pl.buf[i][1] = fhat[i].imag();
    }
    fftw_execute(pl.bwd);
    Eigen::VectorXcd out(n);
    for (int i = 0; i < n; ++i) out[i] = cd(pl.buf[i][0], pl.buf[i][1]);
    return out;
}

Eigen::VectorXcd SpectralOps::forward(const Eigen::VectorXd& f) const {
    return forward(Eigen::VectorXcd(f.cast<cd>()));
}

Eigen::VectorXd SpectralOps::backward_real(const Eigen::VectorXcd& fhat) const {
    return backward(fhat).real();
}

Eigen::VectorXcd SpectralOps::apply_symbol(const Eigen::VectorXd& f,
                                           const std::vector<cd>& symbol) const {
    Eigen::VectorXcd fh = forward(f);
    for (int i = 0; i < fh.size(); ++i) fh[i] *= symbol[i];
    return fh;
}

RField SpectralOps::dx(const RField& f) const {
    std::vector<cd> sym(g_.size());
    for (int a2 = 0; a2 < g_.N2; ++a2)
        for (int a1 = 0; a1 < g_.N1; ++a1) {
            Vec2 g = gvec(a1, a2);
            bool nyq = (m1_[a1] == -g_.N1 / 2) || (m2_[a2] == -g_.N2 / 2);
            sym[g_.idx(a1, a2)] = nyq ? cd(0, 0) : cd(0, g.x);
        }
    return RField(f.grid, backward_real(apply_symbol(f.v, sym)));
}

RField SpectralOps::dy(const RField& f) const {
    std::vector<cd> sym(g_.size());
    for (int a2 = 0; a2 < g_.N2; ++a2)
        for (int a1 = 0; a1 < g_.N1; ++a1) {
            Vec2 g = gvec(a1, a2);
            bool nyq = (m1_[a1] == -g_.N1 / 2) || (m2_[a2] == -g_.N2 / 2);
            sym[g_.idx(a1, a2)] = nyq ? cd(0, 0) : cd(0, g.y);
        }
    return RField(f.grid, backward_real(apply_symbol(f.v, sym)));
}

RField SpectralOps::laplacian(const RField& f) const {
    std::vector<cd> sym(g_.size());
    for (int a2 = 0; a2 < g_.N2; ++a2)
        for (int a1 = 0; a1 < g_.N1; ++a1) sym[g_.idx(a1, a2)] = -g2_sym(a1, a2);
    return RField(f.grid, backward_real(apply_symbol(f.v, sym)));
}

RField SpectralOps::inv_laplacian(const RField& f) const {
    std::vector<cd> sym(g_.size());
    for (int a2 = 0; a2 < g_.N2; ++a2)
        for (int a1 = 0; a1 < g_.N1; ++a1) {
            double g2 = g2_sym(a1, a2);
            sym[g_.idx(a1, a2)] = (g2 == 0.0) ? cd(0) : cd(-1.0 / g2);
        }
    return RField(f.grid, backward_real(apply_symbol(f.v, sym)));
}

RField SpectralOps::inv_biharmonic(const RField& f) const {
    return inv_biharmonic_shifted(f, 0.0);
}

RField SpectralOps::inv_biharmonic_shifted(const RField& f, double c) const {
    std::vector<cd> sym(g_.size());
    for (int a2 = 0; a2 < g_.N2; ++a2)
        for (int a1 = 0; a1 < g_.N1; ++a1) {
            double g2 = g2_sym(a1, a2);
            double s = g2 * g2 + c;
            sym[g_.idx(a1, a2)] = (g2 == 0.0) ? cd(0) : cd(1.0 / s);
        }
    return RField(f.grid, backward_real(apply_symbol(f.v, sym)));
}

VField SpectralOps::curl_star(const RField& h) const {
    VField a(g_);
    a.x = dy(h).v;
    a.y = (-1.0) * dx(h).v;
    return a;
}

RField SpectralOps::curl(const VField& a) const {
    RField fy(a.grid, a.y), fx(a.grid, a.x);
    RField out(a.grid);
    out.v = dx(fy).v - dy(fx).v;
    return out;
}

RField SpectralOps::div(const VField& a) const {
    RField fx(a.grid, a.x), fy(a.grid, a.y);
    RField out(a.grid);
    out.v = dx(fx).v + dy(fy).v;
    return out;
}

VField SpectralOps::grad(const RField& f) const {
    VField g(g_);
    g.x = dx(f).v;
    g.y = dy(f).v;
    return g;
}

Eigen::VectorXcd SpectralOps::translate(const Eigen::VectorXcd& f, Vec2 l) const {
    Eigen::VectorXcd fh = forward(f);
    for (int a2 = 0; a2 < g_.N2; ++a2)
        for (int a1 = 0; a1 < g_.N1; ++a1) {
            Vec2 g = gvec(a1, a2);
            fh[g_.idx(a1, a2)] *= std::polar(1.0, g.x * l.x + g.y * l.y);
        }
    return backward(fh);
}

RField SpectralOps::translate(const RField& f, Vec2 l) const {
    return RField(f.grid, translate(Eigen::VectorXcd(f.v.cast<cd>()), l).real());
}

cd SpectralOps::eval_at(const Eigen::VectorXcd& coeff, double s1, double s2) const {
    cd acc = 0.0;
    for (int a2 = 0; a2 < g_.N2; ++a2)
        for (int a1 = 0; a1 < g_.N1; ++a1) {
            cd c = coeff[g_.idx(a1, a2)];
            if (c == cd(0)) continue;
            acc += c * std::polar(1.0, kTwoPi * (m1_[a1] * s1 + m2_[a2] * s2));
        }
    return acc;
}

Eigen::VectorXd periodic_antiderivative(const Eigen::VectorXd& f, double L) {
    auto s = periodic_antiderivative_series(f, L);
    const int N = int(f.size());
    Eigen::VectorXd out(N);
    for (int j = 0; j < N; ++j) out[j] = s.eval(L * j / N);
    return out;
}

PeriodicAntideriv periodic_antiderivative_series(const Eigen::VectorXd& f, double L) {
    const int N = int(f.size());
    PeriodicAntideriv r;
    r.L = L;
    r.mean = f.mean();
    // naive DFT; gauge-path construction is not performance critical
    r.coeff = Eigen::VectorXcd::Zero(N);
    for (int m = 0; m < N; ++m) {
        cd acc = 0.0;
        for (int j = 0; j < N; ++j) acc += f[j] * std::polar(1.0, -kTwoPi * m * j / double(N));
        r.coeff[m] = acc / double(N);
    }
    r.coeff[0] = 0.0;  // mean handled separately
    return r;
}

double PeriodicAntideriv::eval(double s) const {
    const int N = int(coeff.size());
    cd acc = 0.0;
    for (int a = 0; a < N; ++a) {
        int m = (a <= N / 2 - 1) ? a : a - N;
        if (m == 0) continue;
        cd ikg = cd(0.0, kTwoPi * m / L);
        acc += coeff[a] * (std::polar(1.0, kTwoPi * m * s / L) - 1.0) / ikg;
    }
    return mean * s + acc.real();
}

double integrate_abs2(const CField& f) { return f.grid.quad_weight * f.v.squaredNorm(); }

double integrate_abs4(const CField& f) {
    double acc = 0.0;
    for (int i = 0; i < f.v.size(); ++i) {
        double a2 = std::norm(f.v[i]);
        acc += a2 * a2;
    }
    return f.grid.quad_weight * acc;
}

}  // namespace glv
