#include "rich/sync_solvers.hpp"

#include "rich/errors.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace rich {
namespace {

std::size_t effective_stride(std::size_t k_max, const TraceOptions& opts) {
    if (opts.stride > 0) return opts.stride;
    return k_max <= 1000 ? 1 : 10;
}

class TraceRecorder {
  public:
    TraceRecorder(const SplittingSystem& sys, const RealVector& x0, std::size_t k_max,
                  const TraceOptions& opts)
        : sys_(sys), opts_(opts) {
        trace_.stride = effective_stride(k_max, opts);
        trace_.residual_norms.reserve(k_max / trace_.stride + 2);
        r0_norm_ = norm2(residual(sys, x0));
        trace_.residual_norms.push_back(1.0);
        if (opts.reference_solution) trace_.error_norms.emplace();
        record_error(x0);
    }

    // records iteration k when it falls on the stride (or is the last one)
    void step(std::size_t k, std::size_t k_max, const RealVector& x) {
        if (k % trace_.stride != 0 && k != k_max) return;
        const double rnorm = norm2(residual(sys_, x));
        trace_.residual_norms.push_back(r0_norm_ > 0.0 ? rnorm / r0_norm_ : rnorm);
        record_error(x);
    }

    IterationTrace finish(std::size_t k_max, RealVector x) {
        trace_.iterations = k_max;
        trace_.final_x = std::move(x);
        return std::move(trace_);
    }

  private:
    void record_error(const RealVector& x) {
        if (!opts_.reference_solution) return;
        const RealVector& star = *opts_.reference_solution;
        double sum = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - star[i];
            sum += d * d;
        }
        trace_.error_norms->push_back(std::sqrt(sum));
    }

    const SplittingSystem& sys_;
    TraceOptions opts_;
    IterationTrace trace_;
    double r0_norm_ = 0.0;
};

double alpha_at(const IterParams& params, std::size_t k) {
    if (params.alpha_schedule.empty()) return params.alpha;
    return params.alpha_schedule[k % params.alpha_schedule.size()];
}

} // namespace

void IterationTrace::write_csv(std::ostream& out) const {
    const auto old_precision = out.precision(17);
    out << "k,rel_resid";
    if (error_norms) out << ",error_norm";
    out << '\n';
    for (std::size_t s = 0; s < residual_norms.size(); ++s) {
        std::size_t k = s * stride;
        if (k > iterations) k = iterations;
        out << k << ',' << residual_norms[s];
        if (error_norms) out << ',' << (*error_norms)[s];
        out << '\n';
    }
    out.precision(old_precision);
}

IterationTrace first_order(const SplittingSystem& sys, const RealVector& x0,
                           const IterParams& params, std::size_t k_max,
                           const TraceOptions& opts) {
    if (x0.size() != sys.n) throw std::invalid_argument("first_order: dimension mismatch");
    TraceRecorder recorder(sys, x0, k_max, opts);
    RealVector x = x0, r;
    for (std::size_t k = 1; k <= k_max; ++k) {
        const double alpha = alpha_at(params, k - 1);
        residual(sys, x, r);
        for (std::size_t i = 0; i < sys.n; ++i) x[i] += alpha * r[i];
        recorder.step(k, k_max, x);
    }
    return recorder.finish(k_max, std::move(x));
}

IterationTrace standard_iteration(const SplittingSystem& sys, const RealVector& x0,
                                  std::size_t k_max, const TraceOptions& opts) {
    return first_order(sys, x0, IterParams{1.0, 0.0, {}}, k_max, opts);
}

IterationTrace second_order(const SplittingSystem& sys, const RealVector& x0,
                            const IterParams& params, std::size_t k_max,
                            const TraceOptions& opts) {
    if (x0.size() != sys.n) throw std::invalid_argument("second_order: dimension mismatch");
    TraceRecorder recorder(sys, x0, k_max, opts);
    RealVector x_prev = x0, x = x0, r;
    if (k_max >= 1) {
        // prescribed start: one first order step with the same alpha
        residual(sys, x, r);
        for (std::size_t i = 0; i < sys.n; ++i) x[i] += params.alpha * r[i];
        recorder.step(1, k_max, x);
    }
    const double beta = params.beta;
    const double damp = (1.0 + beta) * params.alpha;
    for (std::size_t k = 2; k <= k_max; ++k) {
        residual(sys, x, r);
        for (std::size_t i = 0; i < sys.n; ++i) {
            const double next = x[i] + (beta * (x[i] - x_prev[i]) + damp * r[i]);
            x_prev[i] = x[i];
            x[i] = next;
        }
        recorder.step(k, k_max, x);
    }
    return recorder.finish(k_max, std::move(x));
}

IterationTrace gauss_seidel(const SplittingSystem& sys, const RealVector& x0,
                            std::size_t k_max, const TraceOptions& opts) {
    if (x0.size() != sys.n) throw std::invalid_argument("gauss_seidel: dimension mismatch");
    const SparseMatrix& a = sys.a;
    RealVector diag(sys.n);
    for (std::size_t i = 0; i < sys.n; ++i) {
        diag[i] = a.at(i, i);
        if (diag[i] == 0.0) {
            throw singular_preconditioner_error("gauss_seidel: zero diagonal in row " +
                                                std::to_string(i));
        }
    }
    TraceRecorder recorder(sys, x0, k_max, opts);
    RealVector x = x0;
    for (std::size_t k = 1; k <= k_max; ++k) {
        for (std::size_t i = 0; i < sys.n; ++i) {
            double sum = 0.0;
            for (std::size_t e = a.row_start[i]; e < a.row_start[i + 1]; ++e) {
                sum += a.value[e] * x[a.col_index[e]];
            }
            x[i] += (sys.c[i] - sum) / diag[i];
        }
        recorder.step(k, k_max, x);
    }
    return recorder.finish(k_max, std::move(x));
}

IterationTrace damped_sweeps(const SplittingSystem& sys, const RealVector& x0, double alpha,
                             std::size_t k_max, const TraceOptions& opts) {
    if (x0.size() != sys.n) throw std::invalid_argument("damped_sweeps: dimension mismatch");
    const SparseMatrix& a = sys.a;
    TraceRecorder recorder(sys, x0, k_max, opts);
    RealVector x = x0;
    for (std::size_t k = 1; k <= k_max; ++k) {
        for (std::size_t i = 0; i < sys.n; ++i) {
            double sum = 0.0;
            for (std::size_t e = a.row_start[i]; e < a.row_start[i + 1]; ++e) {
                sum += a.value[e] * x[a.col_index[e]];
            }
            x[i] += alpha * (sys.c[i] - sum);
        }
        recorder.step(k, k_max, x);
    }
    return recorder.finish(k_max, std::move(x));
}

} // namespace rich
