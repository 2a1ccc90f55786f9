#pragma once

#include "rich/sparse.hpp"
#include "rich/splitting.hpp"

#include <complex>
#include <functional>
#include <optional>
#include <utility>

namespace rich {

/// Interval [a, b] containing spec(A), a > 0. In the Jacobi setting
/// a = 1 - rho(T), b = 1 + rho(T).
struct SpectrumBounds {
    double a;
    double b;

    SpectrumBounds(double a_, double b_);
    static SpectrumBounds from_rho(double rho) { return {1.0 - rho, 1.0 + rho}; }
};

/// Richardson parameters. beta = 0 means first order. An optional alpha
/// schedule (cycled when shorter than the run) covers the non-stationary case.
struct IterParams {
    double alpha = 1.0;
    double beta = 0.0;
    std::vector<double> alpha_schedule; // empty = stationary

    bool second_order() const { return beta != 0.0; }
};

/// Frankel-optimal second order parameters for spec(A) in [a, b].
struct OptimalParams {
    double alpha;
    double beta; // = q^2
    double q;    // asymptotic convergence factor
};

/// Positive weight vector certifying T w <= rho_eps w componentwise.
struct PerronWeight {
    RealVector w;
    double epsilon;
    double rho_eps;
};

/// Matrix-free linear operator on R^dim.
struct LinearOperator {
    std::size_t dim = 0;
    std::function<void(const RealVector&, RealVector&)> apply;
};

struct PowerIterResult {
    double radius = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Power iteration with all-ones start and norm-ratio estimate.
/// Intended for entrywise-nonnegative operators (Perron-Frobenius), where
/// the dominant eigenvalue is real and the positive start vector has a
/// component along the Perron vector. max_iters = 0 means 100 * dim.
PowerIterResult power_iteration_radius(const LinearOperator& op, double tol = 1e-10,
                                       std::size_t max_iters = 0);

/// Entrywise absolute value of the first order iteration matrix I - alpha A
/// (beta = 0), or of the doubled-size second order block operator
/// [[ |1+beta| |I - alpha A|, |beta| I ], [ I, 0 ]]. force_doubled selects the
/// doubled form even at beta = 0.
LinearOperator abs_operator(const SparseMatrix& a, const IterParams& params,
                            bool force_doubled = false);

/// Exact doubled-size operator T_{alpha,beta}; used to cross-check the
/// root-based radii against the actual operator spectrum.
LinearOperator second_order_operator(const SparseMatrix& a, const IterParams& params);

/// T applied matrix-free as x - A x (valid for unit-diagonal splittings and
/// any A with T = I - A).
LinearOperator iteration_matrix_operator(const SparseMatrix& a);

double optimal_first_order_alpha(const SpectrumBounds& bounds);

/// rho(T_alpha) = max(|1 - alpha a|, |1 - alpha b|).
double first_order_sync_radius(double alpha, const SpectrumBounds& bounds);

/// |1 - alpha| + alpha rho; < 1 iff alpha in (0, 2/(1+rho)).
double first_order_async_bound(double alpha, double rho);

/// alpha = 2/(a+b), beta = ((sqrt b - sqrt a)/(sqrt b + sqrt a))^2 = q^2.
/// Degenerate a = b gives (1/a, 0, 0): exact solve in one damped step.
OptimalParams optimal_second_order(const SpectrumBounds& bounds);

/// Roots of lambda^2 - (1+beta)(1 - alpha mu) lambda + beta = 0.
std::pair<std::complex<double>, std::complex<double>>
quadratic_roots_sync(double mu, const IterParams& params);

/// Roots of lambda^2 - |1+beta| mu lambda - |beta| = 0 (always real).
std::pair<double, double> quadratic_roots_async(double mu, const IterParams& params);

/// Max root modulus of the synchronous quadratic over mu sampled uniformly
/// on [a, b], endpoints included.
double second_order_sync_radius(const IterParams& params, const SpectrumBounds& bounds,
                                std::size_t samples = 1024);

/// Largest root of the asynchronous quadratic at mu = |1-alpha| + alpha rho,
/// the largest eigenvalue of |I - alpha A| in the zero-diagonal Jacobi case.
double second_order_async_radius(const IterParams& params, double rho);

/// The guaranteed asynchronous second order region:
/// alpha > 0 and |1+beta|(|1-alpha| + alpha rho) + |beta| < 1.
bool async_condition_holds(const IterParams& params, double rho);

/// Largest admissible beta for given alpha: (1-nu)/(1+nu) with
/// nu = |1-alpha| + alpha rho, or nothing when nu >= 1.
std::optional<double> beta_upper_bound(double alpha, double rho);

/// Constructive Perron weight: power iteration on T + delta E with delta
/// shrunk from epsilon/n until rho(T_delta) <= rho(T) + epsilon and the
/// inequality T w <= rho_eps w verifies componentwise.
PerronWeight perron_weight(const LinearOperator& t_apply, double epsilon);

/// q^k (1 + k (1-q^2)/(1+q^2)), the second order error bound factor.
double error_bound_factor(double q, std::size_t k);

/// radius_sync / radius_async over a uniform (alpha, beta) grid for the
/// spectrum model a = 1 - rho, b = 1 + rho. Grid points with alpha <= 0 get
/// NaN in radius_async (serialized as an empty CSV field).
struct SpectralGrid {
    std::vector<double> alpha_values;
    std::vector<double> beta_values;
    std::vector<double> radius_sync;  // row-major: [beta_index * n_alpha + alpha_index]
    std::vector<double> radius_async;
    double rho = 0.0;

    double sync_at(std::size_t bi, std::size_t ai) const {
        return radius_sync[bi * alpha_values.size() + ai];
    }
    double async_at(std::size_t bi, std::size_t ai) const {
        return radius_async[bi * alpha_values.size() + ai];
    }
    void write_csv(std::ostream& out) const;
};

SpectralGrid contour_grid(double alpha_min, double alpha_max, double beta_min, double beta_max,
                          double rho, std::size_t resolution);

} // namespace rich
