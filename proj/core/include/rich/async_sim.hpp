#pragma once

#include "rich/spectral.hpp"
#include "rich/splitting.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace rich {

/// Generator description for the explicit update sets J_k and delays s_j(k)
/// of the general asynchronous model.
///   synchronous    - every component updated each instant, delay 0.
///   cyclic         - one component per instant, round robin, delay 0.
///   bounded_random - each component enters J_k with probability update_prob,
///                    forced after being idle for max_delay instants; per
///                    instant, each source component is read at a delay
///                    uniform on {0 .. min(max_delay, k-1)}.
/// Bounded generators satisfy the admissibility conditions by construction:
/// s_j(k) <= k-1 always, delays never exceed max_delay, and every component
/// is updated at least once every max_delay+1 instants.
struct Schedule {
    enum class Kind { synchronous, cyclic, bounded_random };
    Kind kind = Kind::synchronous;
    std::size_t horizon = 0; // number of instants
    std::size_t max_delay = 0;
    double update_prob = 1.0;
    std::uint64_t seed = 0;

    static Schedule synchronous(std::size_t horizon) {
        return {Kind::synchronous, horizon, 0, 1.0, 0};
    }
    static Schedule cyclic(std::size_t horizon) { return {Kind::cyclic, horizon, 0, 1.0, 0}; }
    static Schedule bounded_random(std::size_t horizon, std::size_t max_delay,
                                   double update_prob, std::uint64_t seed) {
        return {Kind::bounded_random, horizon, max_delay, update_prob, seed};
    }
};

/// One realized instant: the update set and the per-source read delays.
struct ScheduleStep {
    std::vector<std::uint32_t> updates;
    std::vector<std::uint32_t> delays; // one entry per component, capped at k-1
};

/// Deterministic realization of a Schedule over `dim` components. Replays
/// identically for a given (kind, seed); steps can be dumped/validated.
class ScheduleGenerator {
  public:
    ScheduleGenerator(const Schedule& schedule, std::size_t dim);

    /// Realizes instant k (1-based); fills step.
    void generate(std::size_t k, ScheduleStep& step);

    const Schedule& schedule() const { return schedule_; }

  private:
    Schedule schedule_;
    std::size_t dim_;
    std::uint64_t rng_state_;
    std::vector<std::size_t> last_update_; // instant of last update per component

    std::uint64_t next_u64();
};

/// Writes a realization as replayable text, one line per instant: k;J_k;delays
void dump_schedule(std::ostream& out, const Schedule& schedule, std::size_t dim);

struct SimTrace {
    std::vector<double> residual_norms; // sampled every stride instants
    bool diverged = false;
    std::size_t instants = 0;
    std::size_t stride = 1;

    double final_residual() const {
        return residual_norms.empty() ? 1.0 : residual_norms.back();
    }
    void write_csv(std::ostream& out) const; // k,rel_resid
};

/// Relative residual above this (or non-finite) marks the trace diverged.
inline constexpr double kDivergenceCap = 1e6;

/// Asynchronous model applied to G(x) = T_alpha x + alpha c, replayed
/// deterministically against the given schedule. x^0 = 0.
SimTrace simulate_first_order(const SplittingSystem& sys, const IterParams& params,
                              const Schedule& schedule, std::size_t stride);

/// Same model on the doubled (current || previous) system of the second order
/// recurrence; the first update of each current-block component uses the
/// first order start rule.
SimTrace simulate_second_order(const SplittingSystem& sys, const IterParams& params,
                               const Schedule& schedule, std::size_t stride);

struct SweepRow {
    std::size_t max_delay;
    std::uint64_t seed;
    double final_residual;
    bool diverged;
};

/// simulate_second_order across a (max_delay, seed) grid.
std::vector<SweepRow> asynchrony_sweep(const SplittingSystem& sys, const IterParams& params,
                                       const std::vector<std::size_t>& delay_bounds,
                                       const std::vector<std::uint64_t>& seeds,
                                       std::size_t horizon, double update_prob = 0.5,
                                       std::size_t stride = 100);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

} // namespace rich
