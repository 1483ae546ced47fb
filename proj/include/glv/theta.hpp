#pragma once

#include <vector>

#include "glv/grid.hpp"

namespace glv {

// Theta-series representation of null(L^n - n):
//
//   psi0(x) = e^{(i n/2) x2 (x1 + i x2)} sum_k c_k e^{i k sqrt(2 pi Im tau) (x1 + i x2)}
//
// with the coefficient recursion c_{k+n} = e^{i n pi tau} e^{2 k i pi tau} c_k,
// so c_0..c_{n-1} are free and the series decays super-exponentially for
// Im tau > 0. Truncation |k| <= K keeps the dropped tail below 1e-14 of the
// largest term for the automatic K.
class ThetaState {
  public:
    ThetaState(const LatticeShape& shape, int n, std::vector<cd> c, int K = 0);
    // basis element j: c_j = 1, other free coefficients zero
    static ThetaState basis_element(const LatticeShape& shape, int n, int j, int K = 0);

    const LatticeShape& shape() const { return shape_; }
    int flux() const { return n_; }
    int truncation() const { return K_; }

    cd eval(Vec2 x) const;
    CField sample(const GridSpec& grid) const;

  private:
    LatticeShape shape_;
    int n_;
    std::vector<cd> c_;
    int K_;
    std::vector<cd> exponent_;  // log c_k + i k beta z part assembled in eval
    std::vector<bool> active_;
    double beta_;  // sqrt(2 pi Im tau)

    void build_coefficient_exponents();
};

int auto_truncation(const LatticeShape& shape, int n);

// n-dimensional sampled null basis; throws when the Gram matrix of the basis
// is ill-conditioned (condition number > 1e6).
std::vector<CField> null_basis(const LatticeShape& shape, int n, const GridSpec& grid, int K = 0);

// Relative residual of the lowest-Landau-level current identity
//   Im( conj(psi0) D_{A0} psi0 ) = -(1/2) curl* |psi0|^2
// for an n = 1 state; fields away from the null space give O(1) values.
double lll_current_identity_residual(const CField& psi0);

}  // namespace glv
