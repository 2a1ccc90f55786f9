#include "rich/async_sim.hpp"

#include "rich/rng.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace rich {
namespace {

/// Ring of the last W global state vectors; slot for instant t is t % W.
class History {
  public:
    History(std::size_t window, std::size_t dim, const RealVector& initial)
        : window_(window), slots_(window, initial) {
        (void)dim;
    }

    const RealVector& at(std::size_t instant) const { return slots_[instant % window_]; }
    RealVector& slot(std::size_t instant) { return slots_[instant % window_]; }

  private:
    std::size_t window_;
    std::vector<RealVector> slots_;
};

struct SimEngine {
    const SplittingSystem& sys;
    const Schedule& schedule;
    std::size_t dim; // n for first order, 2n for second order
    std::size_t stride;

    /// update(i, read) -> new value of component i, where read(j) is the
    /// scheduled delayed view of component j.
    template <typename Update, typename ResidualOf>
    SimTrace run(Update&& update, ResidualOf&& residual_of) {
        if (schedule.kind == Schedule::Kind::bounded_random && schedule.max_delay + 2 == 0) {
            throw std::invalid_argument("simulate: delay bound overflow");
        }
        const std::size_t window =
            schedule.kind == Schedule::Kind::bounded_random ? schedule.max_delay + 2 : 2;

        SimTrace trace;
        trace.stride = stride == 0 ? 1 : stride;

        RealVector x0(dim, 0.0);
        History history(window, dim, x0);
        trace.residual_norms.push_back(1.0);

        ScheduleGenerator generator(schedule, dim);
        ScheduleStep step;
        std::size_t k = 0;
        while (k < schedule.horizon) {
            ++k;
            generator.generate(k, step);
            const RealVector& latest = history.at(k - 1);
            RealVector& next = history.slot(k);
            next = latest; // components outside J_k are copied forward
            auto read = [&](std::size_t j) -> double {
                const std::size_t d = step.delays[j];
                if (d + 1 > k) {
                    throw std::logic_error("simulate: schedule requested delay beyond history");
                }
                return history.at(k - 1 - d)[j];
            };
            for (std::uint32_t i : step.updates) next[i] = update(i, read);

            if (k % trace.stride == 0 || k == schedule.horizon) {
                const double rel = residual_of(next);
                trace.residual_norms.push_back(rel);
                if (!std::isfinite(rel) || rel > kDivergenceCap) {
                    trace.diverged = true;
                    break;
                }
            }
        }
        trace.instants = k;
        return trace;
    }
};

} // namespace

ScheduleGenerator::ScheduleGenerator(const Schedule& schedule, std::size_t dim)
    : schedule_(schedule), dim_(dim), rng_state_(schedule.seed), last_update_(dim, 0) {
    if (schedule.kind == Schedule::Kind::bounded_random &&
        !(schedule.update_prob > 0.0 && schedule.update_prob <= 1.0)) {
        throw std::invalid_argument("Schedule: update_prob must be in (0, 1]");
    }
}

std::uint64_t ScheduleGenerator::next_u64() {
    std::uint64_t z = (rng_state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void ScheduleGenerator::generate(std::size_t k, ScheduleStep& step) {
    step.updates.clear();
    step.delays.assign(dim_, 0);
    switch (schedule_.kind) {
        case Schedule::Kind::synchronous:
            step.updates.resize(dim_);
            for (std::size_t i = 0; i < dim_; ++i) step.updates[i] = static_cast<std::uint32_t>(i);
            break;
        case Schedule::Kind::cyclic:
            step.updates.push_back(static_cast<std::uint32_t>((k - 1) % dim_));
            break;
        case Schedule::Kind::bounded_random: {
            const std::size_t b = schedule_.max_delay;
            const std::uint64_t threshold =
                schedule_.update_prob >= 1.0
                    ? ~0ULL
                    : static_cast<std::uint64_t>(schedule_.update_prob * 18446744073709551616.0);
            for (std::size_t i = 0; i < dim_; ++i) {
                const bool forced = k - last_update_[i] > b;
                if (forced || next_u64() <= threshold) {
                    step.updates.push_back(static_cast<std::uint32_t>(i));
                    last_update_[i] = k;
                }
            }
            const std::size_t cap = std::min(b, k - 1);
            for (std::size_t j = 0; j < dim_; ++j) {
                step.delays[j] = static_cast<std::uint32_t>(next_u64() % (cap + 1));
            }
            break;
        }
    }
}

void dump_schedule(std::ostream& out, const Schedule& schedule, std::size_t dim) {
    ScheduleGenerator generator(schedule, dim);
    ScheduleStep step;
    for (std::size_t k = 1; k <= schedule.horizon; ++k) {
        generator.generate(k, step);
        out << k << ';';
        for (std::size_t i = 0; i < step.updates.size(); ++i) {
            if (i) out << ',';
            out << step.updates[i];
        }
        out << ';';
        for (std::size_t j = 0; j < step.delays.size(); ++j) {
            if (j) out << ',';
            out << step.delays[j];
        }
        out << '\n';
    }
}

void SimTrace::write_csv(std::ostream& out) const {
    const auto old_precision = out.precision(17);
    out << "k,rel_resid\n";
    for (std::size_t s = 0; s < residual_norms.size(); ++s) {
        std::size_t k = s * stride;
        if (k > instants) k = instants;
        out << k << ',' << residual_norms[s] << '\n';
    }
    out.precision(old_precision);
}

SimTrace simulate_first_order(const SplittingSystem& sys, const IterParams& params,
                              const Schedule& schedule, std::size_t stride) {
    const SparseMatrix& a = sys.a;
    const double alpha = params.alpha;
    const double r0_norm = norm2(sys.c); // x^0 = 0
    RealVector work;

    SimEngine engine{sys, schedule, sys.n, stride};
    return engine.run(
        [&](std::size_t i, auto&& read) {
            double sum = 0.0;
            for (std::size_t e = a.row_start[i]; e < a.row_start[i + 1]; ++e) {
                sum += a.value[e] * read(a.col_index[e]);
            }
            return read(i) + alpha * (sys.c[i] - sum);
        },
        [&](const RealVector& x) {
            residual(sys, x, work);
            return r0_norm > 0.0 ? norm2(work) / r0_norm : norm2(work);
        });
}

SimTrace simulate_second_order(const SplittingSystem& sys, const IterParams& params,
                               const Schedule& schedule, std::size_t stride) {
    const SparseMatrix& a = sys.a;
    const std::size_t n = sys.n;
    const double alpha = params.alpha;
    const double beta = params.beta;
    const double damp = (1.0 + beta) * alpha;
    const double r0_norm = norm2(sys.c);
    std::vector<bool> started(n, false); // first update uses the first order rule
    RealVector cur_view, work;
    cur_view.resize(n);

    SimEngine engine{sys, schedule, 2 * n, stride};
    return engine.run(
        [&](std::size_t i, auto&& read) {
            if (i >= n) return read(i - n); // trailing block carries the previous iterate
            double sum = 0.0;
            for (std::size_t e = a.row_start[i]; e < a.row_start[i + 1]; ++e) {
                sum += a.value[e] * read(a.col_index[e]);
            }
            const double ci = read(i);
            if (!started[i]) {
                started[i] = true;
                return ci + alpha * (sys.c[i] - sum);
            }
            const double pi = read(n + i);
            return ci + (beta * (ci - pi) + damp * (sys.c[i] - sum));
        },
        [&](const RealVector& y) {
            for (std::size_t i = 0; i < n; ++i) cur_view[i] = y[i];
            residual(sys, cur_view, work);
            return r0_norm > 0.0 ? norm2(work) / r0_norm : norm2(work);
        });
}

std::vector<SweepRow> asynchrony_sweep(const SplittingSystem& sys, const IterParams& params,
                                       const std::vector<std::size_t>& delay_bounds,
                                       const std::vector<std::uint64_t>& seeds,
                                       std::size_t horizon, double update_prob,
                                       std::size_t stride) {
    if (delay_bounds.empty()) throw std::invalid_argument("asynchrony_sweep: no delay bounds");
    std::vector<SweepRow> rows;
    rows.reserve(delay_bounds.size() * seeds.size());
    for (std::size_t b : delay_bounds) {
        for (std::uint64_t seed : seeds) {
            const Schedule schedule = Schedule::bounded_random(horizon, b, update_prob, seed);
            const SimTrace trace = simulate_second_order(sys, params, schedule, stride);
            rows.push_back({b, seed, trace.final_residual(), trace.diverged});
        }
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    const auto old_precision = out.precision(17);
    out << "max_delay,seed,final_resid,diverged\n";
    for (const SweepRow& row : rows) {
        out << row.max_delay << ',' << row.seed << ',' << row.final_residual << ','
            << (row.diverged ? 1 : 0) << '\n';
    }
    out.precision(old_precision);
}

} // namespace rich
