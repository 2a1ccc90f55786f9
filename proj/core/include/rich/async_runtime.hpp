#pragma once

#include "rich/spectral.hpp"
#include "rich/splitting.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace rich {

enum class PartitionMode { balanced, unbalanced };
enum class SolverOrder { first, second };

struct AsyncConfig {
    std::size_t num_threads = 1;
    PartitionMode partition_mode = PartitionMode::balanced;
    double unbalanced_ratio = 2.0 / 3.0; // small-block size relative to n/p, in (0,1)
    std::size_t target_avg_updates = 500;
    IterParams params;
    std::uint64_t seed = 0;
    std::size_t repetitions = 1;
    bool pin_threads = false; // best-effort scatter affinity
};

/// Contiguous ownership intervals, one per thread, covering [0, n).
struct Partition {
    std::vector<std::pair<std::size_t, std::size_t>> ranges; // [begin, end) per thread

    std::size_t owner_of(std::size_t i) const;
    std::size_t max_block() const;
};

/// Result of one asynchronous run. Update counts are per component; a run
/// failed when its final relative residual exceeds 1 (or is non-finite,
/// reported as +inf).
struct RunStats {
    std::vector<std::size_t> update_counts;
    std::size_t range = 0; // max - min update count
    double rel_resid = 0.0;
    bool failed = false;
    double wall_time = 0.0; // seconds
};

struct AggregateStats {
    double avg_range = 0.0;
    double avg_rel_resid = 0.0;
    std::size_t failures = 0;
    double avg_time = 0.0;
    std::size_t runs = 0;
};

Partition partition_unknowns(std::size_t n, const AsyncConfig& config);

/// Asynchronous first order Richardson: each worker sweeps its owned
/// components in index order applying x_i <- x_i + alpha (c_i - (A x)_i),
/// reading the shared vector without synchronization. Workers stop once the
/// shared update counter (polled per sweep) reaches n * target_avg_updates.
/// x^0 = 0.
RunStats run_async_first_order(const SplittingSystem& sys, const AsyncConfig& config);

/// Asynchronous second order Richardson on shared (current, previous) arrays.
/// An update of component i reads shared current values of neighbors, computes
/// new_i = cur_i + beta (cur_i - prev_i) + (1+beta) alpha (c_i - (A cur)_i),
/// then writes prev_i <- cur_i followed by cur_i <- new_i. New values are
/// staged per local sweep and published at its end, so a worker's own block
/// advances one consistent generation per sweep; one thread reproduces the
/// synchronous recurrence. The first local sweep uses the first order start
/// rule per owned component.
RunStats run_async_second_order(const SplittingSystem& sys, const AsyncConfig& config);

/// Runs the configured solver config.repetitions times with fresh x^0 = 0 and
/// aggregates; failed runs are included in the averages. Per-run stats are
/// appended to *raw when given.
AggregateStats repeat_runs(const SplittingSystem& sys, const AsyncConfig& config,
                           SolverOrder order, std::vector<RunStats>* raw = nullptr);

/// One aggregate CSV row: threads,avg_range,avg_rel_resid,failures,async_time,sync_time
void write_aggregate_csv_header(std::ostream& out);
void write_aggregate_csv_row(std::ostream& out, std::size_t threads, const AggregateStats& agg,
                             double sync_time);

} // namespace rich
