#include "rich/spectral.hpp"

#include "rich/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace rich {
namespace {

/// I - alpha A assembled as a sparse matrix; entries |.| when abs is set.
SparseMatrix assemble_shifted(const SparseMatrix& a, double alpha, bool entrywise_abs) {
    if (a.nrows != a.ncols) throw std::invalid_argument("operator requires a square matrix");
    std::vector<std::tuple<std::size_t, std::size_t, double>> triplets;
    triplets.reserve(a.nnz() + a.nrows);
    std::vector<bool> diag_seen(a.nrows, false);
    for (std::size_t i = 0; i < a.nrows; ++i) {
        for (std::size_t k = a.row_start[i]; k < a.row_start[i + 1]; ++k) {
            const std::size_t j = a.col_index[k];
            double v = -alpha * a.value[k];
            if (j == i) {
                v += 1.0;
                diag_seen[i] = true;
            }
            triplets.emplace_back(i, j, entrywise_abs ? std::abs(v) : v);
        }
    }
    for (std::size_t i = 0; i < a.nrows; ++i) {
        if (!diag_seen[i]) triplets.emplace_back(i, i, 1.0);
    }
    return SparseMatrix::from_triplets(a.nrows, a.ncols, std::move(triplets));
}

double max_abs_root_sync(double mu, double alpha, double beta) {
    const double p = (1.0 + beta) * (1.0 - alpha * mu);
    const double disc = p * p - 4.0 * beta;
    if (disc < 0.0) return std::sqrt(beta); // complex pair, |lambda| = sqrt(beta)
    const double s = std::sqrt(disc);
    return std::max(std::abs((p + s) / 2.0), std::abs((p - s) / 2.0));
}

} // namespace

SpectrumBounds::SpectrumBounds(double a_, double b_) : a(a_), b(b_) {
    if (!(0.0 < a && a <= b)) {
        throw std::invalid_argument("SpectrumBounds: require 0 < a <= b");
    }
}

PowerIterResult power_iteration_radius(const LinearOperator& op, double tol,
                                       std::size_t max_iters) {
    const std::size_t n = op.dim;
    if (max_iters == 0) max_iters = 100 * n;
    RealVector x(n, 1.0 / std::sqrt(static_cast<double>(n))), y(n);

    PowerIterResult result;
    double prev_estimate = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t it = 1; it <= max_iters; ++it) {
        op.apply(x, y);
        // Norm-ratio estimate ||T x|| / ||x|| with ||x|| = 1. Unlike the
        // plain Rayleigh quotient it is not biased by a -rho eigenvalue
        // tying the dominant one in magnitude (zero-diagonal splittings of
        // bipartite matrices), where both modes survive normalization.
        const double estimate = norm2(y);
        result.radius = estimate;
        result.iterations = it;
        if (estimate == 0.0) { // operator annihilates the iterate: radius 0
            result.converged = true;
            return result;
        }
        if (std::isfinite(prev_estimate) &&
            std::abs(estimate - prev_estimate) / estimate < tol) {
            result.converged = true;
            return result;
        }
        prev_estimate = estimate;
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / estimate;
    }
    return result; // unconverged, best estimate
}

LinearOperator abs_operator(const SparseMatrix& a, const IterParams& params, bool force_doubled) {
    SparseMatrix b = assemble_shifted(a, params.alpha, /*entrywise_abs=*/true);
    const std::size_t n = a.nrows;
    if (!params.second_order() && !force_doubled) {
        return {n, [b = std::move(b)](const RealVector& x, RealVector& y) { matvec(b, x, y); }};
    }
    const double top = std::abs(1.0 + params.beta);
    const double mom = std::abs(params.beta);
    return {2 * n, [b = std::move(b), n, top, mom](const RealVector& x, RealVector& y) {
                if (x.size() != 2 * n) throw std::invalid_argument("abs_operator: dimension mismatch");
                y.resize(2 * n);
                for (std::size_t i = 0; i < n; ++i) {
                    double sum = 0.0;
                    for (std::size_t k = b.row_start[i]; k < b.row_start[i + 1]; ++k) {
                        sum += b.value[k] * x[b.col_index[k]];
                    }
                    y[i] = top * sum + mom * x[n + i];
                }
                for (std::size_t i = 0; i < n; ++i) y[n + i] = x[i];
            }};
}

LinearOperator second_order_operator(const SparseMatrix& a, const IterParams& params) {
    SparseMatrix b = assemble_shifted(a, params.alpha, /*entrywise_abs=*/false);
    const std::size_t n = a.nrows;
    const double top = 1.0 + params.beta;
    const double mom = params.beta;
    return {2 * n, [b = std::move(b), n, top, mom](const RealVector& x, RealVector& y) {
                if (x.size() != 2 * n) {
                    throw std::invalid_argument("second_order_operator: dimension mismatch");
                }
                y.resize(2 * n);
                for (std::size_t i = 0; i < n; ++i) {
                    double sum = 0.0;
                    for (std::size_t k = b.row_start[i]; k < b.row_start[i + 1]; ++k) {
                        sum += b.value[k] * x[b.col_index[k]];
                    }
                    y[i] = top * sum - mom * x[n + i];
                }
                for (std::size_t i = 0; i < n; ++i) y[n + i] = x[i];
            }};
}

LinearOperator iteration_matrix_operator(const SparseMatrix& a) {
    const std::size_t n = a.nrows;
    return {n, [&a, n](const RealVector& x, RealVector& y) {
                matvec(a, x, y);
                for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - y[i];
            }};
}

double optimal_first_order_alpha(const SpectrumBounds& bounds) {
    return 2.0 / (bounds.a + bounds.b);
}

double first_order_sync_radius(double alpha, const SpectrumBounds& bounds) {
    return std::max(std::abs(1.0 - alpha * bounds.a), std::abs(1.0 - alpha * bounds.b));
}

double first_order_async_bound(double alpha, double rho) {
    if (!(alpha > 0.0)) throw std::invalid_argument("first_order_async_bound: alpha must be > 0");
    return std::abs(1.0 - alpha) + alpha * rho;
}

OptimalParams optimal_second_order(const SpectrumBounds& bounds) {
    if (bounds.a == bounds.b) return {1.0 / bounds.a, 0.0, 0.0};
    const double sa = std::sqrt(bounds.a);
    const double sb = std::sqrt(bounds.b);
    const double q = (sb - sa) / (sb + sa);
    return {2.0 / (bounds.a + bounds.b), q * q, q};
}

std::pair<std::complex<double>, std::complex<double>>
quadratic_roots_sync(double mu, const IterParams& params) {
    const double p = (1.0 + params.beta) * (1.0 - params.alpha * mu);
    const double disc = p * p - 4.0 * params.beta;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        return {std::complex<double>((p + s) / 2.0, 0.0),
                std::complex<double>((p - s) / 2.0, 0.0)};
    }
    const double s = std::sqrt(-disc);
    return {std::complex<double>(p / 2.0, s / 2.0), std::complex<double>(p / 2.0, -s / 2.0)};
}

std::pair<double, double> quadratic_roots_async(double mu, const IterParams& params) {
    if (mu < 0.0) {
        throw std::invalid_argument("quadratic_roots_async: mu must be >= 0");
    }
    const double p = std::abs(1.0 + params.beta) * mu;
    const double s = std::sqrt(p * p + 4.0 * std::abs(params.beta));
    return {(p + s) / 2.0, (p - s) / 2.0};
}

double second_order_sync_radius(const IterParams& params, const SpectrumBounds& bounds,
                                std::size_t samples) {
    if (samples < 2) throw std::invalid_argument("second_order_sync_radius: samples must be >= 2");
    double radius = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const double mu =
            bounds.a + (bounds.b - bounds.a) * static_cast<double>(s) / (samples - 1);
        radius = std::max(radius, max_abs_root_sync(mu, params.alpha, params.beta));
    }
    return radius;
}

double second_order_async_radius(const IterParams& params, double rho) {
    if (!(params.alpha > 0.0)) {
        throw std::invalid_argument("second_order_async_radius: alpha must be > 0");
    }
    const double mu_max = std::abs(1.0 - params.alpha) + params.alpha * rho;
    return quadratic_roots_async(mu_max, params).first;
}

bool async_condition_holds(const IterParams& params, double rho) {
    if (!(params.alpha > 0.0)) return false;
    const double nu = std::abs(1.0 - params.alpha) + params.alpha * rho;
    return std::abs(1.0 + params.beta) * nu + std::abs(params.beta) < 1.0;
}

std::optional<double> beta_upper_bound(double alpha, double rho) {
    if (!(alpha > 0.0)) throw std::invalid_argument("beta_upper_bound: alpha must be > 0");
    const double nu = std::abs(1.0 - alpha) + alpha * rho;
    if (nu >= 1.0) return std::nullopt;
    return (1.0 - nu) / (1.0 + nu);
}

PerronWeight perron_weight(const LinearOperator& t_apply, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("perron_weight: epsilon must be > 0");
    const std::size_t n = t_apply.dim;
    const double rho = power_iteration_radius(t_apply).radius;

    double delta = epsilon / static_cast<double>(n);
    for (int attempt = 0; attempt < 60; ++attempt, delta /= 2.0) {
        // T_delta x = T x + delta * sum(x) * ones
        LinearOperator shifted{n, [&t_apply, delta](const RealVector& x, RealVector& y) {
                                   t_apply.apply(x, y);
                                   double sum = 0.0;
                                   for (double v : x) sum += v;
                                   for (double& v : y) v += delta * sum;
                               }};
        auto piter = power_iteration_radius(shifted, 1e-12);
        if (!piter.converged) continue;

        // Recover the Perron vector of T_delta by power iteration on
        // I + T_delta: same eigenvectors, but an eigenvalue near -rho (the
        // bipartite branch of zero-diagonal splittings, which plain power
        // sweeps cannot damp when delta is tiny) maps to 1 - rho and decays.
        RealVector w(n, 1.0), y(n);
        for (int sweep = 0; sweep < 5000; ++sweep) {
            shifted.apply(w, y);
            for (std::size_t i = 0; i < n; ++i) y[i] += w[i];
            double wmax = 0.0;
            for (double v : y) wmax = std::max(wmax, std::abs(v));
            if (wmax == 0.0) break;
            bool settled = true;
            for (std::size_t i = 0; i < n; ++i) {
                const double next = y[i] / wmax;
                if (std::abs(next - w[i]) > 1e-14 * std::max(1.0, std::abs(next))) settled = false;
                w[i] = next;
            }
            if (settled) break;
        }

        bool positive = true;
        for (double v : w) positive = positive && v > 0.0;
        if (!positive) continue;

        // certify with the tightest rho_eps the computed weight supports
        t_apply.apply(w, y);
        double rho_eps = 0.0;
        for (std::size_t i = 0; i < n; ++i) rho_eps = std::max(rho_eps, y[i] / w[i]);
        if (rho_eps > rho + epsilon) continue;

        bool certified = true;
        for (std::size_t i = 0; i < n; ++i) certified = certified && y[i] <= rho_eps * w[i];
        if (!certified) continue;

        return {std::move(w), epsilon, rho_eps};
    }
    throw certification_error("perron_weight: could not certify T w <= rho_eps w");
}

double error_bound_factor(double q, std::size_t k) {
    if (!(q >= 0.0 && q < 1.0)) throw std::invalid_argument("error_bound_factor: require 0 <= q < 1");
    const double kk = static_cast<double>(k);
    return std::pow(q, kk) * (1.0 + kk * (1.0 - q * q) / (1.0 + q * q));
}

SpectralGrid contour_grid(double alpha_min, double alpha_max, double beta_min, double beta_max,
                          double rho, std::size_t resolution) {
    if (resolution < 2) throw std::invalid_argument("contour_grid: resolution must be >= 2");
    SpectralGrid grid;
    grid.rho = rho;
    grid.alpha_values.resize(resolution);
    grid.beta_values.resize(resolution);
    for (std::size_t i = 0; i < resolution; ++i) {
        const double t = static_cast<double>(i) / (resolution - 1);
        grid.alpha_values[i] = alpha_min + t * (alpha_max - alpha_min);
        grid.beta_values[i] = beta_min + t * (beta_max - beta_min);
    }
    const SpectrumBounds bounds = SpectrumBounds::from_rho(rho);
    grid.radius_sync.resize(resolution * resolution);
    grid.radius_async.resize(resolution * resolution);
    for (std::size_t bi = 0; bi < resolution; ++bi) {
        for (std::size_t ai = 0; ai < resolution; ++ai) {
            IterParams p{grid.alpha_values[ai], grid.beta_values[bi], {}};
            const std::size_t idx = bi * resolution + ai;
            grid.radius_sync[idx] = second_order_sync_radius(p, bounds);
            grid.radius_async[idx] = p.alpha > 0.0
                                         ? second_order_async_radius(p, rho)
                                         : std::numeric_limits<double>::quiet_NaN();
        }
    }
    return grid;
}

void SpectralGrid::write_csv(std::ostream& out) const {
    const auto old_precision = out.precision(17);
    out << "alpha,beta,radius_sync,radius_async\n";
    for (std::size_t bi = 0; bi < beta_values.size(); ++bi) {
        for (std::size_t ai = 0; ai < alpha_values.size(); ++ai) {
            const double rs = sync_at(bi, ai);
            const double ra = async_at(bi, ai);
            out << alpha_values[ai] << ',' << beta_values[bi] << ',' << rs << ',';
            if (std::isfinite(ra)) out << ra;
            out << '\n';
        }
    }
    out.precision(old_precision);
}

} // namespace rich
