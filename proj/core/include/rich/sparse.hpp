#pragma once

#include <cstddef>
#include <tuple>
#include <vector>

namespace rich {

using RealVector = std::vector<double>;

/// Compressed sparse row matrix with sorted, duplicate-free rows.
struct SparseMatrix {
    std::size_t nrows = 0;
    std::size_t ncols = 0;
    std::vector<std::size_t> row_start; // length nrows+1
    std::vector<std::size_t> col_index; // length nnz, strictly increasing per row
    std::vector<double> value;          // length nnz

    std::size_t nnz() const { return value.size(); }

    /// Value at (i, j), zero if not stored. Linear scan of the row.
    double at(std::size_t i, std::size_t j) const;

    /// Checks the CSR structural invariants; throws std::invalid_argument on violation.
    void validate() const;

    static SparseMatrix identity(std::size_t n);

    /// Builds a CSR matrix from (row, col, value) triplets.
    /// Entries are sorted per row and duplicates are summed.
    static SparseMatrix from_triplets(std::size_t nrows, std::size_t ncols,
                                      std::vector<std::tuple<std::size_t, std::size_t, double>> triplets);
};

/// Five-point finite difference Laplacian on an m-by-m grid with Dirichlet
/// boundary, row-major (natural) unknown ordering. Diagonal 4, neighbors -1.
SparseMatrix laplacian_2d(std::size_t m);

/// y = A x, row-wise accumulation in stored order.
void matvec(const SparseMatrix& a, const RealVector& x, RealVector& y);
RealVector matvec(const SparseMatrix& a, const RealVector& x);

double norm2(const RealVector& x);

/// max_i |x_i / w_i|; requires w > 0 componentwise.
double norm_inf_weighted(const RealVector& x, const RealVector& w);

} // namespace rich
