#pragma once

#include "rich/spectral.hpp"
#include "rich/splitting.hpp"

#include <iosfwd>
#include <optional>

namespace rich {

/// Per-iteration record of a synchronous run. Residual norms are relative to
/// the initial residual (index 0 is exactly 1) and recomputed from scratch at
/// every recorded iteration. error_norms holds ||x^k - x*||_2 when a
/// reference solution is supplied.
struct IterationTrace {
    std::vector<double> residual_norms;
    std::optional<std::vector<double>> error_norms;
    std::size_t iterations = 0;
    std::size_t stride = 1;
    RealVector final_x;

    void write_csv(std::ostream& out) const; // k,rel_resid[,error_norm]
};

struct TraceOptions {
    const RealVector* reference_solution = nullptr;
    std::size_t stride = 0; // 0 = every iteration for k_max <= 1000, else every 10
};

/// x^{k+1} = T x^k + c, recorded for k_max steps.
IterationTrace standard_iteration(const SplittingSystem& sys, const RealVector& x0,
                                  std::size_t k_max, const TraceOptions& opts = {});

/// First order Richardson x^{k+1} = x^k + alpha_k r^k. A schedule shorter
/// than k_max wraps cyclically; alpha = 1 reproduces standard_iteration
/// bitwise.
IterationTrace first_order(const SplittingSystem& sys, const RealVector& x0,
                           const IterParams& params, std::size_t k_max,
                           const TraceOptions& opts = {});

/// Second order Richardson. x^1 is one first order step with the same alpha,
/// then x^{k+1} = x^k + beta (x^k - x^{k-1}) + (1+beta) alpha r^k.
IterationTrace second_order(const SplittingSystem& sys, const RealVector& x0,
                            const IterParams& params, std::size_t k_max,
                            const TraceOptions& opts = {});

/// Forward in-place sweep in index order, k_max sweeps; each component update
/// is x_i <- x_i + r_i / a_ii using current values. Matches a single-thread
/// asynchronous first order run (alpha = 1) bitwise on unit-diagonal systems.
IterationTrace gauss_seidel(const SplittingSystem& sys, const RealVector& x0,
                            std::size_t k_max, const TraceOptions& opts = {});

/// Gauss-Seidel-style sweep generalized to damping alpha:
/// x_i <- x_i + alpha (c_i - (A x)_i) in index order using current values.
/// alpha = 1 on a unit-diagonal system reproduces gauss_seidel bitwise; this
/// is the deterministic oracle for a single-thread asynchronous run.
IterationTrace damped_sweeps(const SplittingSystem& sys, const RealVector& x0, double alpha,
                             std::size_t k_max, const TraceOptions& opts = {});

} // namespace rich
