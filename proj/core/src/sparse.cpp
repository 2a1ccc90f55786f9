#include "rich/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rich {

double SparseMatrix::at(std::size_t i, std::size_t j) const {
    for (std::size_t k = row_start[i]; k < row_start[i + 1]; ++k) {
        if (col_index[k] == j) return value[k];
    }
    return 0.0;
}

void SparseMatrix::validate() const {
    if (row_start.size() != nrows + 1 || row_start.front() != 0 ||
        row_start.back() != value.size() || col_index.size() != value.size()) {
        throw std::invalid_argument("SparseMatrix: inconsistent CSR arrays");
    }
    for (std::size_t i = 0; i < nrows; ++i) {
        if (row_start[i] > row_start[i + 1]) {
            throw std::invalid_argument("SparseMatrix: row_start not non-decreasing");
        }
        for (std::size_t k = row_start[i]; k < row_start[i + 1]; ++k) {
            if (col_index[k] >= ncols) {
                throw std::invalid_argument("SparseMatrix: column index out of range");
            }
            if (k > row_start[i] && col_index[k] <= col_index[k - 1]) {
                throw std::invalid_argument("SparseMatrix: columns not strictly increasing in row");
            }
        }
    }
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
    SparseMatrix a;
    a.nrows = a.ncols = n;
    a.row_start.resize(n + 1);
    a.col_index.resize(n);
    a.value.assign(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        a.row_start[i] = i;
        a.col_index[i] = i;
    }
    a.row_start[n] = n;
    return a;
}

SparseMatrix SparseMatrix::from_triplets(
    std::size_t nrows, std::size_t ncols,
    std::vector<std::tuple<std::size_t, std::size_t, double>> triplets) {
    std::sort(triplets.begin(), triplets.end(),
              [](const auto& u, const auto& v) {
                  return std::tie(std::get<0>(u), std::get<1>(u)) <
                         std::tie(std::get<0>(v), std::get<1>(v));
              });
    SparseMatrix a;
    a.nrows = nrows;
    a.ncols = ncols;
    a.row_start.assign(nrows + 1, 0);
    for (std::size_t t = 0; t < triplets.size(); ++t) {
        auto [i, j, v] = triplets[t];
        if (i >= nrows || j >= ncols) {
            throw std::invalid_argument("from_triplets: index out of range");
        }
        // triplets are sorted, so duplicate (i,j) pairs are adjacent
        if (t > 0) {
            auto [pi, pj, pv] = triplets[t - 1];
            if (pi == i && pj == j) {
                a.value.back() += v;
                continue;
            }
        }
        a.col_index.push_back(j);
        a.value.push_back(v);
        a.row_start[i + 1]++;
    }
    for (std::size_t i = 0; i < nrows; ++i) a.row_start[i + 1] += a.row_start[i];
    a.validate();
    return a;
}

SparseMatrix laplacian_2d(std::size_t m) {
    if (m == 0) throw std::invalid_argument("laplacian_2d: grid size must be >= 1");
    const std::size_t n = m * m;
    SparseMatrix a;
    a.nrows = a.ncols = n;
    a.row_start.reserve(n + 1);
    a.row_start.push_back(0);
    a.col_index.reserve(5 * n);
    a.value.reserve(5 * n);
    for (std::size_t row = 0; row < m; ++row) {
        for (std::size_t col = 0; col < m; ++col) {
            const std::size_t i = row * m + col;
            if (row > 0) {
                a.col_index.push_back(i - m);
                a.value.push_back(-1.0);
            }
            if (col > 0) {
                a.col_index.push_back(i - 1);
                a.value.push_back(-1.0);
            }
            a.col_index.push_back(i);
            a.value.push_back(4.0);
            if (col + 1 < m) {
                a.col_index.push_back(i + 1);
                a.value.push_back(-1.0);
            }
            if (row + 1 < m) {
                a.col_index.push_back(i + m);
                a.value.push_back(-1.0);
            }
            a.row_start.push_back(a.col_index.size());
        }
    }
    return a;
}

void matvec(const SparseMatrix& a, const RealVector& x, RealVector& y) {
    if (x.size() != a.ncols) throw std::invalid_argument("matvec: dimension mismatch");
    y.resize(a.nrows);
    for (std::size_t i = 0; i < a.nrows; ++i) {
        double sum = 0.0;
        for (std::size_t k = a.row_start[i]; k < a.row_start[i + 1]; ++k) {
            sum += a.value[k] * x[a.col_index[k]];
        }
        y[i] = sum;
    }
}

RealVector matvec(const SparseMatrix& a, const RealVector& x) {
    RealVector y;
    matvec(a, x, y);
    return y;
}

double norm2(const RealVector& x) {
    double sum = 0.0;
    for (double v : x) sum += v * v;
    return std::sqrt(sum);
}

double norm_inf_weighted(const RealVector& x, const RealVector& w) {
    if (x.size() != w.size()) throw std::invalid_argument("norm_inf_weighted: dimension mismatch");
    double best = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(w[i] > 0.0)) throw std::invalid_argument("norm_inf_weighted: nonpositive weight");
        best = std::max(best, std::abs(x[i] / w[i]));
    }
    return best;
}

} // namespace rich
