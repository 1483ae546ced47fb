#include "glv/theta.hpp"

#include <cmath>
#include <stdexcept>

#include "glv/fft.hpp"
#include "glv/stencil.hpp"

namespace glv {

int auto_truncation(const LatticeShape& shape, int n) {
    // tail terms decay like exp(-pi Im(tau) k^2 / n); ask for < 1e-15
    double t2 = shape.tau.imag();
    int K = int(std::ceil(std::sqrt(36.0 * n / (kPi * t2)))) + n + 3;
    return std::max(20, K);
}

ThetaState::ThetaState(const LatticeShape& shape, int n, std::vector<cd> c, int K)
    : shape_(shape), n_(n), c_(std::move(c)) {
    if (!(shape.tau.imag() > 0.0)) throw std::invalid_argument("theta: Im tau must be > 0");
    if (n < 1) throw std::invalid_argument("theta: n must be >= 1");
    if (int(c_.size()) != n) throw std::invalid_argument("theta: need n free coefficients");
    K_ = (K > 0) ? K : auto_truncation(shape, n);
    beta_ = std::sqrt(kTwoPi * shape.tau.imag());
    build_coefficient_exponents();
}

ThetaState ThetaState::basis_element(const LatticeShape& shape, int n, int j, int K) {
    std::vector<cd> c(n, cd(0));
    c.at(j) = 1.0;
    return ThetaState(shape, n, std::move(c), K);
}

void ThetaState::build_coefficient_exponents() {
    // exponent_[k+K] = log of c_k as accumulated recursion exponent, with the
    // free coefficient folded in as a multiplicative factor at evaluation
    exponent_.assign(2 * K_ + 1, cd(0));
    active_.assign(2 * K_ + 1, false);
    const cd iptau = cd(0, 1) * kPi * shape_.tau;
    for (int m = 0; m < n_; ++m) {
        if (c_[m] == cd(0)) continue;
        cd logc = std::log(c_[m]);
        // upward: c_{k+n} = e^{i n pi tau} e^{2 k i pi tau} c_k
        cd e = logc;
        for (int k = m; k <= K_; k += n_) {
            exponent_[k + K_] = e;
            active_[k + K_] = true;
            e += iptau * double(n_ + 2 * k);
        }
        // downward: c_k = c_{k+n} e^{-i n pi tau} e^{-2 k i pi tau}
        e = logc;
        for (int k = m - n_; k >= -K_; k -= n_) {
            e -= iptau * double(n_ + 2 * k);
            exponent_[k + K_] = e;
            active_[k + K_] = true;
        }
    }
}

cd ThetaState::eval(Vec2 x) const {
    // term exponent: log c_k + (i n/2) x2 (x1 + i x2) + i k beta (x1 + i x2)
    const cd pref = cd(0, 0.5 * n_) * x.y * cd(x.x, x.y);
    cd acc = 0.0;
    for (int k = -K_; k <= K_; ++k) {
        if (!active_[k + K_]) continue;
        cd expo = exponent_[k + K_] + pref + cd(0, double(k) * beta_) * cd(x.x, x.y);
        acc += std::exp(expo);
    }
    return acc;
}

CField ThetaState::sample(const GridSpec& grid) const {
    if (std::abs(grid.shape.tau - shape_.tau) > 1e-13 || grid.n != n_)
        throw std::invalid_argument("theta sample: grid mismatch");
    CField out(grid);
    // Along a row the exponent is linear in p (x2 constant, t1 = (r,0)),
    // so each k-term is a geometric sequence: one exp per (q, k).
    const double d1x = grid.shape.t1.x / grid.N1;
    for (int q = 0; q < grid.N2; ++q) {
        Vec2 x0 = grid.point(0, q);
        for (int k = -K_; k <= K_; ++k) {
            if (!active_[k + K_]) continue;
            cd expo0 = exponent_[k + K_] + cd(0, 0.5 * n_) * x0.y * cd(x0.x, x0.y) +
                       cd(0, double(k) * beta_) * cd(x0.x, x0.y);
            cd cur = std::exp(expo0);
            cd ratio = std::polar(1.0, d1x * (0.5 * n_ * x0.y + double(k) * beta_));
            for (int p = 0; p < grid.N1; ++p) {
                out.v[grid.idx(p, q)] += cur;
                cur *= ratio;
            }
        }
    }
    return out;
}

std::vector<CField> null_basis(const LatticeShape& shape, int n, const GridSpec& grid, int K) {
    std::vector<CField> basis;
    basis.reserve(n);
    for (int j = 0; j < n; ++j)
        basis.push_back(ThetaState::basis_element(shape, n, j, K).sample(grid));

    Eigen::MatrixXcd gram(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) gram(i, j) = dotc(basis[i], basis[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
    double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > 1e6)
        throw std::runtime_error("theta null basis ill-conditioned; increase K or N");
    return basis;
}

double lll_current_identity_residual(const CField& psi0) {
    const GridSpec& g = psi0.grid;
    CovariantStencil st(g);
    SpectralOps sp(g);

    Eigen::VectorXcd gx, gy;
    st.grad_cart(psi0.v, gx, gy);
    RField dens(g);
    for (int i = 0; i < g.size(); ++i) dens.v[i] = std::norm(psi0.v[i]);
    VField cs = sp.curl_star(dens);

    VField res(g);
    for (int i = 0; i < g.size(); ++i) {
        res.x[i] = std::imag(std::conj(psi0.v[i]) * gx[i]) + 0.5 * cs.x[i];
        res.y[i] = std::imag(std::conj(psi0.v[i]) * gy[i]) + 0.5 * cs.y[i];
    }
    return norm_l2(res) / norm_l2(dens);
}

}  // namespace glv
