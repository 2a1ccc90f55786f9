#pragma once

#include "rich/sparse.hpp"

namespace rich {

/// The preconditioned system A x = c with A = I - T.
/// For Jacobi-split inputs the diagonal of A is exactly 1, so T has zero
/// diagonal. T is never stored; T x is computed as x - A x.
struct SplittingSystem {
    SparseMatrix a;
    RealVector c;
    std::size_t n = 0;

    /// True when all off-diagonal entries of A are <= 0, i.e. T = I - A >= 0.
    bool nonnegative = false;

    /// Throws splitting_error when the nonnegativity assumption does not hold.
    void require_nonnegative() const;
};

/// Jacobi splitting: A = D^{-1} A_hat, c = D^{-1} b_hat with D = diag(A_hat).
/// The diagonal of A is set to 1 exactly.
SplittingSystem jacobi_split(const SparseMatrix& a_hat, const RealVector& b_hat);

/// r = c - A x.
RealVector residual(const SplittingSystem& sys, const RealVector& x);
void residual(const SplittingSystem& sys, const RealVector& x, RealVector& r);

} // namespace rich
