#include "rich/async_runtime.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

#ifdef __linux__
#include <pthread.h>
#include <sched.h>
#endif

namespace rich {
namespace {

using Clock = std::chrono::steady_clock;

inline double load_relaxed(const double& slot) {
    return std::atomic_ref<const double>(slot).load(std::memory_order_relaxed);
}

inline void store_relaxed(double& slot, double v) {
    std::atomic_ref<double>(slot).store(v, std::memory_order_relaxed);
}

void pin_to_core(std::size_t thread_index) {
#ifdef __linux__
    const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
    cpu_set_t set;
    CPU_ZERO(&set);
    CPU_SET(static_cast<int>(thread_index % cores), &set);
    pthread_setaffinity_np(pthread_self(), sizeof(set), &set);
#else
    (void)thread_index;
#endif
}

struct RunOutcome {
    std::vector<std::size_t> sweeps; // per thread
    double wall_time = 0.0;
};

/// Spawns workers, waits, and returns per-thread sweep counts and wall time.
template <typename Worker>
RunOutcome launch(std::size_t num_threads, bool pin, Worker&& worker) {
    RunOutcome outcome;
    outcome.sweeps.assign(num_threads, 0);
    const auto start = Clock::now();
    if (num_threads == 1) {
        outcome.sweeps[0] = worker(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(num_threads);
        for (std::size_t t = 0; t < num_threads; ++t) {
            threads.emplace_back([&, t] {
                if (pin) pin_to_core(t);
                outcome.sweeps[t] = worker(t);
            });
        }
        for (auto& th : threads) th.join();
    }
    outcome.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
    return outcome;
}

RunStats finalize(const SplittingSystem& sys, const Partition& partition,
                  const RunOutcome& outcome, const RealVector& x) {
    RunStats stats;
    stats.wall_time = outcome.wall_time;
    stats.update_counts.resize(sys.n);
    std::size_t lo = std::numeric_limits<std::size_t>::max(), hi = 0;
    for (std::size_t t = 0; t < partition.ranges.size(); ++t) {
        const auto [begin, end] = partition.ranges[t];
        for (std::size_t i = begin; i < end; ++i) stats.update_counts[i] = outcome.sweeps[t];
        lo = std::min(lo, outcome.sweeps[t]);
        hi = std::max(hi, outcome.sweeps[t]);
    }
    stats.range = hi - lo;

    const double r_norm = norm2(residual(sys, x));
    const double r0_norm = norm2(sys.c); // x^0 = 0
    double rel = r0_norm > 0.0 ? r_norm / r0_norm : r_norm;
    if (!std::isfinite(rel)) rel = std::numeric_limits<double>::infinity();
    stats.rel_resid = rel;
    stats.failed = !(rel <= 1.0);
    return stats;
}

} // namespace

std::size_t Partition::owner_of(std::size_t i) const {
    for (std::size_t t = 0; t < ranges.size(); ++t) {
        if (i >= ranges[t].first && i < ranges[t].second) return t;
    }
    throw std::out_of_range("Partition::owner_of: index not covered");
}

std::size_t Partition::max_block() const {
    std::size_t best = 0;
    for (const auto& [begin, end] : ranges) best = std::max(best, end - begin);
    return best;
}

Partition partition_unknowns(std::size_t n, const AsyncConfig& config) {
    const std::size_t p = config.num_threads;
    if (p == 0 || n < p) {
        throw std::invalid_argument("partition_unknowns: need n >= num_threads >= 1");
    }
    Partition partition;
    partition.ranges.reserve(p);
    if (config.partition_mode == PartitionMode::balanced) {
        // blocks of size floor(n/p) or ceil(n/p)
        std::size_t begin = 0;
        for (std::size_t t = 0; t < p; ++t) {
            const std::size_t size = n / p + (t < n % p ? 1 : 0);
            partition.ranges.emplace_back(begin, begin + size);
            begin += size;
        }
    } else {
        if (!(config.unbalanced_ratio > 0.0 && config.unbalanced_ratio < 1.0)) {
            throw std::invalid_argument("partition_unknowns: unbalanced ratio must be in (0,1)");
        }
        // first ceil(p/2) threads get blocks of ratio * n/p, the remainder is
        // spread over the rest
        const std::size_t small_threads = (p + 1) / 2;
        const std::size_t large_threads = p - small_threads;
        if (large_threads == 0) {
            throw std::invalid_argument("partition_unknowns: unbalanced mode needs >= 2 threads");
        }
        const auto small_size = static_cast<std::size_t>(
            config.unbalanced_ratio * static_cast<double>(n) / static_cast<double>(p));
        if (small_size == 0 || small_size * small_threads >= n) {
            throw std::invalid_argument("partition_unknowns: unbalanced ratio leaves no work");
        }
        const std::size_t remainder = n - small_size * small_threads;
        std::size_t begin = 0;
        for (std::size_t t = 0; t < small_threads; ++t) {
            partition.ranges.emplace_back(begin, begin + small_size);
            begin += small_size;
        }
        for (std::size_t t = 0; t < large_threads; ++t) {
            const std::size_t size = remainder / large_threads + (t < remainder % large_threads ? 1 : 0);
            partition.ranges.emplace_back(begin, begin + size);
            begin += size;
        }
    }
    return partition;
}

RunStats run_async_first_order(const SplittingSystem& sys, const AsyncConfig& config) {
    const Partition partition = partition_unknowns(sys.n, config);
    const SparseMatrix& a = sys.a;
    const double alpha = config.params.alpha;
    const std::size_t total_target = sys.n * config.target_avg_updates;

    RealVector x(sys.n, 0.0);
    std::atomic<std::size_t> counter{0};

    auto outcome = launch(config.num_threads, config.pin_threads, [&](std::size_t t) {
        const auto [begin, end] = partition.ranges[t];
        const std::size_t block = end - begin;
        std::size_t sweeps = 0;
        for (;;) {
            for (std::size_t i = begin; i < end; ++i) {
                double sum = 0.0;
                for (std::size_t e = a.row_start[i]; e < a.row_start[i + 1]; ++e) {
                    sum += a.value[e] * load_relaxed(x[a.col_index[e]]);
                }
                const double xi = load_relaxed(x[i]);
                store_relaxed(x[i], xi + alpha * (sys.c[i] - sum));
            }
            ++sweeps;
            if (counter.fetch_add(block, std::memory_order_relaxed) + block >= total_target) {
                break;
            }
        }
        return sweeps;
    });

    return finalize(sys, partition, outcome, x);
}

RunStats run_async_second_order(const SplittingSystem& sys, const AsyncConfig& config) {
    const Partition partition = partition_unknowns(sys.n, config);
    const SparseMatrix& a = sys.a;
    const double alpha = config.params.alpha;
    const double beta = config.params.beta;
    const double damp = (1.0 + beta) * alpha;
    const std::size_t total_target = sys.n * config.target_avg_updates;

    RealVector cur(sys.n, 0.0), prev(sys.n, 0.0);
    std::atomic<std::size_t> counter{0};

    auto outcome = launch(config.num_threads, config.pin_threads, [&](std::size_t t) {
        const auto [begin, end] = partition.ranges[t];
        const std::size_t block = end - begin;
        // New values are staged per local sweep and published afterwards, so
        // a worker's own residuals always see a consistent generation of its
        // block (cross-block reads stay unsynchronized and may mix
        // generations). An in-place three-term update would instead feed
        // half-updated values into the momentum term and diverges for the
        // Frankel-optimal parameters even on a single thread, where this
        // staged form reproduces the synchronous recurrence exactly.
        std::vector<double> next(block);
        std::size_t sweeps = 0;
        for (;;) {
            if (sweeps == 0) {
                // first order start rule on the first local sweep
                for (std::size_t i = begin; i < end; ++i) {
                    double sum = 0.0;
                    for (std::size_t e = a.row_start[i]; e < a.row_start[i + 1]; ++e) {
                        sum += a.value[e] * load_relaxed(cur[a.col_index[e]]);
                    }
                    next[i - begin] = load_relaxed(cur[i]) + alpha * (sys.c[i] - sum);
                }
            } else {
                for (std::size_t i = begin; i < end; ++i) {
                    double sum = 0.0;
                    for (std::size_t e = a.row_start[i]; e < a.row_start[i + 1]; ++e) {
                        sum += a.value[e] * load_relaxed(cur[a.col_index[e]]);
                    }
                    const double ci = load_relaxed(cur[i]);
                    const double pi = load_relaxed(prev[i]);
                    next[i - begin] = ci + (beta * (ci - pi) + damp * (sys.c[i] - sum));
                }
            }
            for (std::size_t i = begin; i < end; ++i) {
                store_relaxed(prev[i], load_relaxed(cur[i])); // fixed order: prev before cur
                store_relaxed(cur[i], next[i - begin]);
            }
            ++sweeps;
            if (counter.fetch_add(block, std::memory_order_relaxed) + block >= total_target) {
                break;
            }
        }
        return sweeps;
    });

    return finalize(sys, partition, outcome, cur);
}

AggregateStats repeat_runs(const SplittingSystem& sys, const AsyncConfig& config,
                           SolverOrder order, std::vector<RunStats>* raw) {
    if (config.repetitions < 1) throw std::invalid_argument("repeat_runs: repetitions must be >= 1");
    AggregateStats agg;
    agg.runs = config.repetitions;
    for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
        RunStats stats = order == SolverOrder::first ? run_async_first_order(sys, config)
                                                     : run_async_second_order(sys, config);
        agg.avg_range += static_cast<double>(stats.range);
        agg.avg_rel_resid += stats.rel_resid;
        agg.avg_time += stats.wall_time;
        if (stats.failed) ++agg.failures;
        if (raw) raw->push_back(std::move(stats));
    }
    agg.avg_range /= static_cast<double>(agg.runs);
    agg.avg_rel_resid /= static_cast<double>(agg.runs);
    agg.avg_time /= static_cast<double>(agg.runs);
    return agg;
}

void write_aggregate_csv_header(std::ostream& out) {
    out << "threads,avg_range,avg_rel_resid,failures,async_time,sync_time\n";
}

void write_aggregate_csv_row(std::ostream& out, std::size_t threads, const AggregateStats& agg,
                             double sync_time) {
    const auto flags = out.flags();
    const auto old_precision = out.precision();
    out << threads << ',' << agg.avg_range << ',';
    out.precision(17);
    out << agg.avg_rel_resid << ',' << agg.failures << ',';
    out.setf(std::ios::fixed);
    out.precision(6);
    out << agg.avg_time << ',' << sync_time << '\n';
    out.flags(flags);
    out.precision(old_precision);
}

} // namespace rich
