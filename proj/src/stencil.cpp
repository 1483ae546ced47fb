#include "glv/stencil.hpp"

#include <cmath>
#include <stdexcept>

namespace glv {

namespace {

std::vector<double> d1_coeffs(int order) {
    switch (order) {
        case 2: return {-0.5, 0.0, 0.5};
        case 4: return {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12};
        case 6: return {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60};
        case 8:
            return {1.0 / 280, -4.0 / 105, 1.0 / 5, -4.0 / 5, 0.0,
                    4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
        default: throw std::invalid_argument("stencil order must be 2, 4, 6 or 8");
    }
}

std::vector<double> d2_coeffs(int order) {
    switch (order) {
        case 2: return {1.0, -2.0, 1.0};
        case 4: return {-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12};
        case 6: return {1.0 / 90, -3.0 / 20, 3.0 / 2, -49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90};
        case 8:
            return {-1.0 / 560, 8.0 / 315, -1.0 / 5, 8.0 / 5, -205.0 / 72,
                    8.0 / 5, -1.0 / 5, 8.0 / 315, -1.0 / 560};
        default: throw std::invalid_argument("stencil order must be 2, 4, 6 or 8");
    }
}

long floor_div(long a, long b) {
    long q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

}  // namespace

CovariantStencil::CovariantStencil(const GridSpec& g, int order)
    : g_(g), order_(order), hw_(order / 2) {
    c1_ = d1_coeffs(order);
    c2_ = d2_coeffs(order);
    if (2 * hw_ >= std::min(g.N1, g.N2))
        throw std::invalid_argument("grid too small for stencil order");

    Vec2 eu = g.shape.t1 * (1.0 / g.N1);
    Vec2 ev = g.shape.t2 * (1.0 / g.N2);
    double det = wedge(eu, ev);  // = phi0 > 0
    double det2 = det * det;
    G11_ = ev.dot(ev) / det2;
    G22_ = eu.dot(eu) / det2;
    G12_ = -eu.dot(ev) / det2;
    jinvT_[0][0] = ev.y / det;
    jinvT_[0][1] = -eu.y / det;
    jinvT_[1][0] = -ev.x / det;
    jinvT_[1][1] = eu.x / det;

    double phi0 = g.phi0();
    double hn = 0.5 * g.n;
    pu_.assign(2 * hw_ + 1, std::vector<cd>(g.N2));
    pv_.assign(2 * hw_ + 1, std::vector<cd>(g.N1));
    for (int k = -hw_; k <= hw_; ++k) {
        for (int q = 0; q < g.N2; ++q) pu_[k + hw_][q] = std::polar(1.0, hn * k * q * phi0);
        for (int p = 0; p < g.N1; ++p) pv_[k + hw_][p] = std::polar(1.0, -hn * k * p * phi0);
    }
    wrap_u_.resize(g.N2);
    wrap_v_.resize(g.N1);
    for (int q = 0; q < g.N2; ++q) wrap_u_[q] = std::polar(1.0, hn * q * g.N1 * phi0);
    for (int p = 0; p < g.N1; ++p) wrap_v_[p] = std::polar(1.0, -hn * p * g.N2 * phi0);
}

void CovariantStencil::apply_dir_u(const Eigen::VectorXcd& in, Eigen::VectorXcd& out,
                                   const std::vector<double>& c) const {
    const int N1 = g_.N1, N2 = g_.N2;
    out.resize(in.size());
    for (int q = 0; q < N2; ++q) {
        const cd wu = wrap_u_[q];
        const cd wu_c = std::conj(wu);
        const int row = q * N1;
        for (int p = 0; p < N1; ++p) {
            cd acc = 0.0;
            for (int k = -hw_; k <= hw_; ++k) {
                double ck = c[k + hw_];
                if (ck == 0.0) continue;
                int p2 = p + k;
                cd ph = pu_[k + hw_][q];
                if (p2 >= N1) {
                    p2 -= N1;
                    ph *= wu;
                } else if (p2 < 0) {
                    p2 += N1;
                    ph *= wu_c;
                }
                acc += ck * ph * in[row + p2];
            }
            out[row + p] = acc;
        }
    }
}

void CovariantStencil::apply_dir_v(const Eigen::VectorXcd& in, Eigen::VectorXcd& out,
                                   const std::vector<double>& c) const {
    const int N1 = g_.N1, N2 = g_.N2;
    out.resize(in.size());
    for (int q = 0; q < N2; ++q) {
        for (int p = 0; p < N1; ++p) {
            cd acc = 0.0;
            for (int k = -hw_; k <= hw_; ++k) {
                double ck = c[k + hw_];
                if (ck == 0.0) continue;
                int q2 = q + k;
                cd ph = pv_[k + hw_][p];
                if (q2 >= N2) {
                    q2 -= N2;
                    ph *= wrap_v_[p];
                } else if (q2 < 0) {
                    q2 += N2;
                    ph *= std::conj(wrap_v_[p]);
                }
                acc += ck * ph * in[q2 * N1 + p];
            }
            out[q * N1 + p] = acc;
        }
    }
}

void CovariantStencil::d1u(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
    apply_dir_u(in, out, c1_);
}
void CovariantStencil::d1v(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
    apply_dir_v(in, out, c1_);
}
void CovariantStencil::d2u(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
    apply_dir_u(in, out, c2_);
}
void CovariantStencil::d2v(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
    apply_dir_v(in, out, c2_);
}

void CovariantStencil::laplacian(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
    Eigen::VectorXcd tmp;
    d2u(in, tmp);
    out = -G11_ * tmp;
    d2v(in, tmp);
    out -= G22_ * tmp;
    if (G12_ != 0.0) {
        Eigen::VectorXcd t2;
        d1v(in, tmp);
        d1u(tmp, t2);
        out -= G12_ * t2;
        d1u(in, tmp);
        d1v(tmp, t2);
        out -= G12_ * t2;
    }
}

void CovariantStencil::grad_cart(const Eigen::VectorXcd& in, Eigen::VectorXcd& outx,
                                 Eigen::VectorXcd& outy) const {
    Eigen::VectorXcd du, dv;
    d1u(in, du);
    d1v(in, dv);
    outx = jinvT_[0][0] * du + jinvT_[0][1] * dv;
    outy = jinvT_[1][0] * du + jinvT_[1][1] * dv;
}

void CovariantStencil::div_cart(const Eigen::VectorXcd& inx, const Eigen::VectorXcd& iny,
                                Eigen::VectorXcd& out) const {
    Eigen::VectorXcd du, dv;
    d1u(inx, du);
    d1v(inx, dv);
    out = jinvT_[0][0] * du + jinvT_[0][1] * dv;
    d1u(iny, du);
    d1v(iny, dv);
    out += jinvT_[1][0] * du + jinvT_[1][1] * dv;
}

void CovariantStencil::ladder(const Eigen::VectorXcd& in, Eigen::VectorXcd& out, int sign) const {
    Eigen::VectorXcd gx, gy;
    grad_cart(in, gx, gy);
    // L_- = D1 + i D2, L_+ = D1 - i D2
    out = (sign < 0) ? Eigen::VectorXcd(gx + cd(0, 1) * gy)
                     : Eigen::VectorXcd(gx - cd(0, 1) * gy);
}

cd CovariantStencil::fetch_logical(const CField& f, long P, long Q, double c1, double c2) const {
    const long N1 = g_.N1, N2 = g_.N2;
    long w2 = floor_div(Q, N2), q = Q - w2 * N2;
    long w1 = floor_div(P, N1), p = P - w1 * N1;
    double phi0 = g_.phi0();
    double area = g_.shape.cell_area;
    // psi(x + w1 t1 + w2 t2) = e^{(in/2)[w1 (t1^x + w2 area) + w2 t2^x]} psi(x)
    double expo = 0.5 * g_.n *
                      (w1 * (double(q) * N1 * phi0 + w2 * area) - w2 * double(p) * N2 * phi0) +
                  w1 * c1 + w2 * c2;
    return std::polar(1.0, expo) * f.v[q * N1 + p];
}

cd CovariantStencil::path_phase(long pa, long qa, double alpha, double beta) const {
    double phi0 = g_.phi0();
    return std::polar(1.0, -0.5 * g_.n * phi0 * (-alpha * double(qa) + beta * double(pa) + alpha * beta));
}

cd CovariantStencil::value_at(const CField& f, Vec2 z, double c1, double c2) const {
    require_same_grid(f.grid, g_);
    const double area = g_.shape.cell_area;
    double u1 = wedge(z, g_.shape.t2) / area * g_.N1;
    double u2 = wedge(g_.shape.t1, z) / area * g_.N2;
    long pa = long(std::floor(u1)), qa = long(std::floor(u2));
    double alpha = u1 - pa, beta = u2 - qa;

    const int W = std::min(std::max(order_ + 4, 8), std::min(g_.N1, g_.N2) / 2);
    const int j0 = -(W / 2 - 1);
    // Lagrange weights on integer nodes j0 .. j0+W-1
    auto weights = [&](double s) {
        std::vector<double> w(W, 1.0);
        for (int j = 0; j < W; ++j) {
            double xj = j0 + j;
            for (int m = 0; m < W; ++m) {
                if (m == j) continue;
                double xm = j0 + m;
                w[j] *= (s - xm) / (xj - xm);
            }
        }
        return w;
    };
    std::vector<double> wa = weights(alpha), wb = weights(beta);

    cd acc = 0.0;
    for (int k = 0; k < W; ++k) {
        cd row = 0.0;
        for (int j = 0; j < W; ++j) {
            long pj = pa + j0 + j, qk = qa + j0 + k;
            cd sample = std::conj(path_phase(pa, qa, double(j0 + j), double(j0 + k))) *
                        fetch_logical(f, pj, qk, c1, c2);
            row += wa[j] * sample;
        }
        acc += wb[k] * row;
    }
    return path_phase(pa, qa, alpha, beta) * acc;
}

CField CovariantStencil::translate(const CField& f, Vec2 l, double c1, double c2) const {
    require_same_grid(f.grid, g_);
    CField out(g_);
    for (int q = 0; q < g_.N2; ++q)
        for (int p = 0; p < g_.N1; ++p) {
            Vec2 z = g_.point(p, q) + l;
            out.v[g_.idx(p, q)] = value_at(f, z, c1, c2);
        }
    return out;
}

CField CovariantStencil::rotate90(const CField& f) const {
    require_same_grid(f.grid, g_);
    if (g_.N1 != g_.N2 || std::abs(g_.shape.tau - cd(0, 1)) > 1e-12)
        throw std::invalid_argument("rotate90 requires tau = i and N1 == N2");
    CField out(g_);
    for (int q = 0; q < g_.N2; ++q)
        for (int p = 0; p < g_.N1; ++p)
            out.v[g_.idx(p, q)] = fetch_logical(f, -long(q), long(p));
    return out;
}

CField CovariantStencil::rotate60(const CField& f) const {
    require_same_grid(f.grid, g_);
    cd tau_hex = std::polar(1.0, kPi / 3.0);
    if (g_.N1 != g_.N2 || std::abs(g_.shape.tau - tau_hex) > 1e-12)
        throw std::invalid_argument("rotate60 requires tau = e^{i pi/3} and N1 == N2");
    CField out(g_);
    for (int q = 0; q < g_.N2; ++q)
        for (int p = 0; p < g_.N1; ++p)
            out.v[g_.idx(p, q)] = fetch_logical(f, -long(q), long(p) + long(q));
    return out;
}

std::pair<CField, CField> covariant_gradient(const CField& psi, const VField* a, int order) {
    CovariantStencil st(psi.grid, order);
    CField gx(psi.grid), gy(psi.grid);
    st.grad_cart(psi.v, gx.v, gy.v);
    if (a) {
        require_same_grid(a->grid, psi.grid);
        for (int i = 0; i < psi.grid.size(); ++i) {
            gx.v[i] -= cd(0, 1) * a->x[i] * psi.v[i];
            gy.v[i] -= cd(0, 1) * a->y[i] * psi.v[i];
        }
    }
    return {std::move(gx), std::move(gy)};
}

double quasiperiodicity_residual(const GridSpec& g, const std::function<cd(Vec2)>& f) {
    double worst = 0.0;
    double hn = 0.5 * g.n;
    for (int q = 0; q < g.N2; ++q)
        for (int p = 0; p < g.N1; ++p) {
            Vec2 x = g.point(p, q);
            cd base = f(x);
            for (Vec2 t : {g.shape.t1, g.shape.t2}) {
                cd lhs = f(x + t);
                cd rhs = std::polar(1.0, hn * wedge(t, x)) * base;
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        }
    return worst;
}

WindingCount count_zeros(const CField& f) {
    CovariantStencil st(f.grid, 2);
    WindingCount wc;
    const int N1 = f.grid.N1, N2 = f.grid.N2;
    for (int q = 0; q < N2; ++q)
        for (int p = 0; p < N1; ++p) {
            cd z00 = st.fetch_logical(f, p, q);
            cd z10 = st.fetch_logical(f, p + 1, q);
            cd z11 = st.fetch_logical(f, p + 1, q + 1);
            cd z01 = st.fetch_logical(f, p, q + 1);
            double w = std::arg(z10 / z00) + std::arg(z11 / z10) + std::arg(z01 / z11) +
                       std::arg(z00 / z01);
            int wind = int(std::lround(w / kTwoPi));
            if (wind != 0) {
                wc.total += wind;
                wc.plaquettes += 1;
            }
        }
    return wc;
}

}  // namespace glv
