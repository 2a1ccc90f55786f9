#include "rich/splitting.hpp"

#include "rich/errors.hpp"

#include <stdexcept>

namespace rich {

void SplittingSystem::require_nonnegative() const {
    if (!nonnegative) {
        throw splitting_error(
            "splitting violates assumption (T >= 0): a positive off-diagonal entry of A exists");
    }
}

SplittingSystem jacobi_split(const SparseMatrix& a_hat, const RealVector& b_hat) {
    if (a_hat.nrows != a_hat.ncols) {
        throw std::invalid_argument("jacobi_split: matrix must be square");
    }
    if (b_hat.size() != a_hat.nrows) {
        throw std::invalid_argument("jacobi_split: right-hand side length mismatch");
    }
    const std::size_t n = a_hat.nrows;

    SplittingSystem sys;
    sys.a = a_hat;
    sys.c.resize(n);
    sys.n = n;
    sys.nonnegative = true;
    for (std::size_t i = 0; i < n; ++i) {
        double diag = 0.0;
        bool have_diag = false;
        for (std::size_t k = sys.a.row_start[i]; k < sys.a.row_start[i + 1]; ++k) {
            if (sys.a.col_index[k] == i) {
                diag = sys.a.value[k];
                have_diag = true;
            }
        }
        if (!have_diag || diag == 0.0) {
            throw singular_preconditioner_error(
                "jacobi_split: zero diagonal entry in row " + std::to_string(i));
        }
        for (std::size_t k = sys.a.row_start[i]; k < sys.a.row_start[i + 1]; ++k) {
            if (sys.a.col_index[k] == i) {
                sys.a.value[k] = 1.0;
            } else {
                sys.a.value[k] /= diag;
                if (sys.a.value[k] > 0.0) sys.nonnegative = false;
            }
        }
        sys.c[i] = b_hat[i] / diag;
    }
    return sys;
}

void residual(const SplittingSystem& sys, const RealVector& x, RealVector& r) {
    if (x.size() != sys.n) throw std::invalid_argument("residual: dimension mismatch");
    r.resize(sys.n);
    for (std::size_t i = 0; i < sys.n; ++i) {
        double sum = 0.0;
        for (std::size_t k = sys.a.row_start[i]; k < sys.a.row_start[i + 1]; ++k) {
            sum += sys.a.value[k] * x[sys.a.col_index[k]];
        }
        r[i] = sys.c[i] - sum;
    }
}

RealVector residual(const SplittingSystem& sys, const RealVector& x) {
    RealVector r;
    residual(sys, x, r);
    return r;
}

} // namespace rich
