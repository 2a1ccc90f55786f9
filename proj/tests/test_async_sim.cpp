#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rich/async_sim.hpp"
#include "rich/rng.hpp"
#include "rich/spectral.hpp"
#include "rich/sync_solvers.hpp"

#include <cmath>
#include <map>
#include <sstream>

using namespace rich;

namespace {

SplittingSystem laplacian_system(std::size_t m, std::uint64_t seed) {
    return jacobi_split(laplacian_2d(m), random_rhs(m * m, seed));
}

struct ParsedStep {
    std::size_t k = 0;
    std::vector<std::size_t> updates;
    std::vector<std::size_t> delays;
};

std::vector<ParsedStep> parse_dump(const std::string& text) {
    std::vector<ParsedStep> steps;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        ParsedStep step;
        std::istringstream row(line);
        std::string field;
        std::getline(row, field, ';');
        step.k = std::stoul(field);
        std::getline(row, field, ';');
        std::istringstream updates(field);
        for (std::string v; std::getline(updates, v, ',');) step.updates.push_back(std::stoul(v));
        std::getline(row, field, ';');
        std::istringstream delays(field);
        for (std::string v; std::getline(delays, v, ',');) step.delays.push_back(std::stoul(v));
        steps.push_back(std::move(step));
    }
    return steps;
}

} // namespace

TEST_CASE("synchronous schedule reproduces the synchronous solvers bitwise") {
    SplittingSystem sys = laplacian_system(7, 13);
    const RealVector x0(sys.n, 0.0);
    const std::size_t k_max = 60;

    SUBCASE("first order") {
        for (double alpha : {0.8, 1.0}) {
            const IterParams params{alpha, 0.0, {}};
            const SimTrace sim =
                simulate_first_order(sys, params, Schedule::synchronous(k_max), 1);
            const IterationTrace ref = first_order(sys, x0, params, k_max);
            REQUIRE(sim.residual_norms.size() == ref.residual_norms.size());
            for (std::size_t s = 0; s < sim.residual_norms.size(); ++s) {
                CHECK(sim.residual_norms[s] == ref.residual_norms[s]);
            }
        }
    }
    SUBCASE("second order") {
        const IterParams params{1.0, 0.05, {}};
        const SimTrace sim = simulate_second_order(sys, params, Schedule::synchronous(k_max), 1);
        const IterationTrace ref = second_order(sys, x0, params, k_max);
        REQUIRE(sim.residual_norms.size() == ref.residual_norms.size());
        for (std::size_t s = 0; s < sim.residual_norms.size(); ++s) {
            CHECK(sim.residual_norms[s] == ref.residual_norms[s]);
        }
    }
}

TEST_CASE("cyclic schedule is Gauss-Seidel one component at a time") {
    SplittingSystem sys = laplacian_system(5, 99);
    const std::size_t sweeps = 8;
    for (double alpha : {1.0, 0.85}) {
        const SimTrace sim = simulate_first_order(sys, IterParams{alpha, 0.0, {}},
                                                  Schedule::cyclic(sweeps * sys.n), sys.n);
        const IterationTrace ref = damped_sweeps(sys, RealVector(sys.n, 0.0), alpha, sweeps);
        REQUIRE(sim.residual_norms.size() == ref.residual_norms.size());
        for (std::size_t s = 0; s < sim.residual_norms.size(); ++s) {
            CHECK(sim.residual_norms[s] == ref.residual_norms[s]);
        }
    }
}

TEST_CASE("bounded random schedules are admissible by construction") {
    const std::size_t dim = 9, horizon = 400, max_delay = 7;
    const Schedule schedule = Schedule::bounded_random(horizon, max_delay, 0.3, 17);
    std::ostringstream out;
    dump_schedule(out, schedule, dim);
    const auto steps = parse_dump(out.str());
    REQUIRE(steps.size() == horizon);

    std::vector<std::size_t> last_update(dim, 0);
    for (const ParsedStep& step : steps) {
        REQUIRE(step.delays.size() == dim);
        // delays never reach past x^0 and respect the bound
        for (std::size_t d : step.delays) {
            CHECK(d <= std::min(max_delay, step.k - 1));
        }
        // update sets are strictly increasing component lists
        for (std::size_t u = 1; u < step.updates.size(); ++u) {
            CHECK(step.updates[u] > step.updates[u - 1]);
        }
        for (std::size_t i : step.updates) {
            REQUIRE(i < dim);
            last_update[i] = step.k;
        }
        // no component stays idle longer than the delay bound allows
        for (std::size_t i = 0; i < dim; ++i) {
            CHECK(step.k - last_update[i] <= max_delay);
        }
    }
}

TEST_CASE("schedule realizations are deterministic per seed") {
    const Schedule a = Schedule::bounded_random(200, 5, 0.5, 8);
    const Schedule b = Schedule::bounded_random(200, 5, 0.5, 9);
    std::ostringstream da1, da2, db;
    dump_schedule(da1, a, 12);
    dump_schedule(da2, a, 12);
    dump_schedule(db, b, 12);
    CHECK(da1.str() == da2.str());
    CHECK(da1.str() != db.str());

    SplittingSystem sys = laplacian_system(4, 3);
    const IterParams params{1.0, 0.0, {}};
    const SimTrace t1 = simulate_first_order(sys, params, a, 10);
    const SimTrace t2 = simulate_first_order(sys, params, a, 10);
    REQUIRE(t1.residual_norms.size() == t2.residual_norms.size());
    for (std::size_t s = 0; s < t1.residual_norms.size(); ++s) {
        CHECK(t1.residual_norms[s] == t2.residual_norms[s]);
    }
}

TEST_CASE("update_prob outside (0, 1] is rejected") {
    std::ostringstream sink;
    CHECK_THROWS_AS(dump_schedule(sink, Schedule::bounded_random(1, 1, 0.0, 1), 3),
                    std::invalid_argument);
    CHECK_THROWS_AS(dump_schedule(sink, Schedule::bounded_random(1, 1, -0.5, 1), 3),
                    std::invalid_argument);
}

TEST_CASE("convergence inside the guaranteed region") {
    SplittingSystem sys = laplacian_system(6, 11);
    const double rho = std::cos(M_PI / 7.0);

    SUBCASE("first order, alpha = 1, arbitrary bounded delays") {
        for (std::size_t b : {1, 5, 20}) {
            const SimTrace trace = simulate_first_order(
                sys, IterParams{1.0, 0.0, {}}, Schedule::bounded_random(6000, b, 0.5, 77), 100);
            CHECK_FALSE(trace.diverged);
            CHECK(trace.final_residual() < 1e-8);
        }
    }
    SUBCASE("second order with beta under the admissible bound") {
        const double beta = 0.8 * *beta_upper_bound(1.0, rho);
        const IterParams params{1.0, beta, {}};
        REQUIRE(async_condition_holds(params, rho));
        for (std::uint64_t seed : {1, 2, 3}) {
            const SimTrace trace = simulate_second_order(
                sys, params, Schedule::bounded_random(8000, 10, 0.5, seed), 100);
            CHECK_FALSE(trace.diverged);
            CHECK(trace.final_residual() < 1e-8);
        }
    }
}

TEST_CASE("divergence outside the guaranteed region under large delays") {
    // beta far above the admissible bound: synchronously stable
    // (sqrt(beta) < 1) yet asynchronously unstable
    SplittingSystem sys = laplacian_system(6, 11);
    const double rho = std::cos(M_PI / 7.0);
    const IterParams params{1.0, 0.9, {}};
    REQUIRE_FALSE(async_condition_holds(params, rho));
    REQUIRE(second_order_async_radius(params, rho) > 1.0);

    const SimTrace sync_trace = simulate_second_order(sys, params, Schedule::synchronous(800), 10);
    CHECK_FALSE(sync_trace.diverged);

    std::size_t diverged = 0;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const SimTrace trace = simulate_second_order(
            sys, params, Schedule::bounded_random(20000, 40, 0.5, seed), 100);
        if (trace.diverged) {
            ++diverged;
            const double last = trace.residual_norms.back();
            CHECK((!std::isfinite(last) || last > kDivergenceCap));
        }
    }
    CHECK(diverged > 0);
}

TEST_CASE("asynchrony_sweep") {
    SplittingSystem sys = laplacian_system(5, 21);
    const IterParams params{1.0, 0.02, {}};
    const std::vector<std::size_t> bounds{0, 3, 9};
    const std::vector<std::uint64_t> seeds{4, 5};

    const auto rows = asynchrony_sweep(sys, params, bounds, seeds, 3000, 0.5, 100);
    REQUIRE(rows.size() == 6);
    std::size_t idx = 0;
    for (std::size_t b : bounds) {
        for (std::uint64_t seed : seeds) {
            CHECK(rows[idx].max_delay == b);
            CHECK(rows[idx].seed == seed);
            CHECK_FALSE(rows[idx].diverged);
            CHECK(rows[idx].final_residual < 1e-6);
            ++idx;
        }
    }

    std::ostringstream out;
    write_sweep_csv(out, rows);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "max_delay,seed,final_resid,diverged");
    std::size_t count = 0;
    while (std::getline(in, line)) {
        ++count;
        CHECK(line.back() == '0'); // none diverged
    }
    CHECK(count == rows.size());

    CHECK_THROWS_AS(asynchrony_sweep(sys, params, {}, seeds, 100), std::invalid_argument);
}

TEST_CASE("trace bookkeeping") {
    SplittingSystem sys = laplacian_system(4, 8);

    SUBCASE("zero horizon leaves the unit residual") {
        const SimTrace trace =
            simulate_first_order(sys, IterParams{1.0, 0.0, {}}, Schedule::synchronous(0), 1);
        CHECK(trace.final_residual() == 1.0);
        CHECK(trace.instants == 0);
        CHECK_FALSE(trace.diverged);
    }
    SUBCASE("stride 0 records every instant; final instant always recorded") {
        const SimTrace a =
            simulate_first_order(sys, IterParams{1.0, 0.0, {}}, Schedule::synchronous(15), 0);
        CHECK(a.stride == 1);
        CHECK(a.residual_norms.size() == 16);
        const SimTrace b =
            simulate_first_order(sys, IterParams{1.0, 0.0, {}}, Schedule::synchronous(15), 4);
        CHECK(b.residual_norms.size() == 5); // k = 0, 4, 8, 12, 15
    }
    SUBCASE("CSV output clamps the trailing instant") {
        const SimTrace trace =
            simulate_first_order(sys, IterParams{1.0, 0.0, {}}, Schedule::synchronous(15), 4);
        std::ostringstream out;
        trace.write_csv(out);
        std::istringstream in(out.str());
        std::string line;
        std::getline(in, line);
        CHECK(line == "k,rel_resid");
        std::vector<std::size_t> ks;
        while (std::getline(in, line)) {
            ks.push_back(std::stoul(line.substr(0, line.find(','))));
        }
        CHECK(ks == std::vector<std::size_t>{0, 4, 8, 12, 15});
    }
}
