// richlab: command line front end for the Richardson solver laboratory.
//
// Subcommands: spectra, contour, experiment, simulate, validate.
// Exit codes: 0 success, 1 usage/config error, 2 numerical assumption
// violation, 3 I/O error.

#include "rich/async_runtime.hpp"
#include "rich/async_sim.hpp"
#include "rich/errors.hpp"
#include "rich/matrix_market.hpp"
#include "rich/rng.hpp"
#include "rich/spectral.hpp"
#include "rich/splitting.hpp"
#include "rich/sync_solvers.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIo = 3;

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open output file: " + path);
    return out;
}

rich::SplittingSystem make_system(std::size_t m, const std::string& matrix_path,
                                  std::uint64_t seed) {
    rich::SparseMatrix a_hat =
        matrix_path.empty() ? rich::laplacian_2d(m) : rich::load_matrix_market(matrix_path);
    if (a_hat.nrows != a_hat.ncols) {
        throw rich::splitting_error("input matrix is not square");
    }
    return rich::jacobi_split(a_hat, rich::random_rhs(a_hat.nrows, seed));
}

double measured_rho(const rich::SplittingSystem& sys) {
    return rich::power_iteration_radius(rich::iteration_matrix_operator(sys.a), 1e-12).radius;
}

std::string partition_spec_help() {
    return "balanced or unbalanced:R with R in (0,1), e.g. unbalanced:0.667";
}

void apply_partition_spec(rich::AsyncConfig& config, const std::string& spec) {
    if (spec == "balanced") {
        config.partition_mode = rich::PartitionMode::balanced;
        return;
    }
    if (spec.rfind("unbalanced", 0) == 0) {
        config.partition_mode = rich::PartitionMode::unbalanced;
        const auto colon = spec.find(':');
        if (colon != std::string::npos) {
            config.unbalanced_ratio = std::stod(spec.substr(colon + 1));
        }
        return;
    }
    throw CLI::ValidationError("--partition", "expected " + partition_spec_help());
}

// ---------------------------------------------------------------- spectra

struct SpectraArgs {
    std::size_t m = 100;
    std::string matrix_path;
    double alpha = 1.0;
    double beta = 0.0;
    bool have_params = false;
};

int run_spectra(const SpectraArgs& args) {
    const rich::SplittingSystem sys = make_system(args.m, args.matrix_path, 0);
    sys.require_nonnegative();

    const double rho = measured_rho(sys);
    std::cout.precision(10);
    std::cout << "n = " << sys.n << "\n";
    std::cout << "rho(T) (power iteration) = " << rho << "\n";
    if (args.matrix_path.empty()) {
        const double exact = std::cos(M_PI / static_cast<double>(args.m + 1));
        std::cout << "rho(T) (Laplacian closed form) = " << exact << "\n";
    }
    const rich::SpectrumBounds bounds = rich::SpectrumBounds::from_rho(rho);
    std::cout << "spectrum bounds: a = " << bounds.a << ", b = " << bounds.b << "\n";
    std::cout << "optimal first order alpha = " << rich::optimal_first_order_alpha(bounds) << "\n";
    const rich::OptimalParams opt = rich::optimal_second_order(bounds);
    std::cout << "optimal second order: alpha = " << opt.alpha << ", beta = " << opt.beta
              << ", q = " << opt.q << "\n";
    std::cout << "second order error bound factor at k=500: "
              << rich::error_bound_factor(opt.q, 500) << "\n";
    if (auto bound = rich::beta_upper_bound(1.0, rho)) {
        std::cout << "async-safe beta upper bound (alpha=1): " << *bound << "\n";
    } else {
        std::cout << "async-safe beta upper bound (alpha=1): none\n";
    }
    if (args.have_params) {
        const rich::IterParams params{args.alpha, args.beta, {}};
        std::cout << "guaranteed async region holds for (alpha=" << args.alpha
                  << ", beta=" << args.beta << "): "
                  << (rich::async_condition_holds(params, rho) ? "yes" : "no") << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------- contour

struct ContourArgs {
    double rho = 0.5;
    double alpha_min = 0.05, alpha_max = 2.0;
    double beta_min = -1.0, beta_max = 1.0;
    std::size_t resolution = 101;
    std::string out = "contour.csv";
};

int run_contour(const ContourArgs& args) {
    const rich::SpectralGrid grid = rich::contour_grid(
        args.alpha_min, args.alpha_max, args.beta_min, args.beta_max, args.rho, args.resolution);
    auto out = open_output(args.out);
    grid.write_csv(out);
    if (!out) throw io_error("write failed: " + args.out);
    std::cout << "wrote " << args.resolution * args.resolution << " grid points to " << args.out
              << "\n";
    return kExitOk;
}

// -------------------------------------------------------------- experiment

struct ExperimentArgs {
    std::size_t m = 100;
    std::string order = "first";
    double alpha = 1.0;
    double beta = 0.0;
    bool optimal_beta = false;
    std::vector<std::size_t> threads{1};
    std::size_t reps = 100;
    std::size_t target_updates = 500;
    std::string partition = "balanced";
    std::uint64_t seed = 1;
    std::string out = "experiment.csv";
    std::string mode = "table";
    std::vector<std::size_t> t_list{100, 200, 300, 400, 500};
    std::size_t tests_per_t = 20;
    bool pin = false;
};

double timed_sync_run(const rich::SplittingSystem& sys, rich::SolverOrder order,
                      const rich::IterParams& params, std::size_t iterations,
                      double* rel_resid = nullptr) {
    const rich::RealVector x0(sys.n, 0.0);
    rich::TraceOptions opts;
    opts.stride = iterations; // record only the final residual
    const auto start = std::chrono::steady_clock::now();
    const rich::IterationTrace trace =
        order == rich::SolverOrder::first ? rich::first_order(sys, x0, params, iterations, opts)
                                          : rich::second_order(sys, x0, params, iterations, opts);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (rel_resid) *rel_resid = trace.residual_norms.back();
    return seconds;
}

int run_experiment_table(const ExperimentArgs& args, const rich::SplittingSystem& sys,
                         const rich::IterParams& params, rich::SolverOrder order) {
    auto out = open_output(args.out);
    rich::write_aggregate_csv_header(out);
    auto runs_out = open_output(args.out + ".runs.csv");
    runs_out << "threads,run,min_updates,max_updates,range,rel_resid,failed,time\n";
    runs_out.precision(17);

    for (std::size_t p : args.threads) {
        rich::AsyncConfig config;
        config.num_threads = p;
        config.target_avg_updates = args.target_updates;
        config.params = params;
        config.seed = args.seed;
        config.repetitions = args.reps;
        config.pin_threads = args.pin;
        apply_partition_spec(config, args.partition);

        std::vector<rich::RunStats> raw;
        const rich::AggregateStats agg = rich::repeat_runs(sys, config, order, &raw);
        const double sync_time = timed_sync_run(sys, order, params, args.target_updates);
        rich::write_aggregate_csv_row(out, p, agg, sync_time);

        for (std::size_t r = 0; r < raw.size(); ++r) {
            const auto& stats = raw[r];
            const auto [lo, hi] =
                std::minmax_element(stats.update_counts.begin(), stats.update_counts.end());
            runs_out << p << ',' << r << ',' << *lo << ',' << *hi << ',' << stats.range << ','
                     << stats.rel_resid << ',' << (stats.failed ? 1 : 0) << ',' << stats.wall_time
                     << '\n';
        }
        std::cout << "threads=" << p << " avg_rel_resid=" << agg.avg_rel_resid
                  << " failures=" << agg.failures << "/" << agg.runs << "\n";
    }
    if (!out || !runs_out) throw io_error("write failed: " + args.out);
    return kExitOk;
}

int run_experiment_timing(const ExperimentArgs& args, const rich::SplittingSystem& sys,
                          const rich::IterParams& params, rich::SolverOrder order) {
    auto out = open_output(args.out);
    out << "t,method,test,time,rel_resid\n";
    out.precision(17);

    for (std::size_t t : args.t_list) {
        rich::AsyncConfig config;
        config.num_threads = args.threads.front();
        config.target_avg_updates = t;
        config.params = params;
        config.seed = args.seed;
        config.pin_threads = args.pin;
        apply_partition_spec(config, args.partition);

        double sync_time_sum = 0.0, sync_resid_sum = 0.0;
        double async_time_sum = 0.0, async_resid_sum = 0.0;
        for (std::size_t test = 0; test < args.tests_per_t; ++test) {
            double sync_resid = 0.0;
            sync_time_sum += timed_sync_run(sys, order, params, t, &sync_resid);
            sync_resid_sum += sync_resid;

            const rich::RunStats stats = order == rich::SolverOrder::first
                                             ? rich::run_async_first_order(sys, config)
                                             : rich::run_async_second_order(sys, config);
            async_time_sum += stats.wall_time;
            async_resid_sum += stats.rel_resid;
            if (order == rich::SolverOrder::second) {
                // individual asynchronous points: run-to-run spread is large
                out << t << ",async," << test << ',' << stats.wall_time << ',' << stats.rel_resid
                    << '\n';
            }
        }
        const double nt = static_cast<double>(args.tests_per_t);
        out << t << ",sync,avg," << sync_time_sum / nt << ',' << sync_resid_sum / nt << '\n';
        if (order == rich::SolverOrder::first) {
            out << t << ",async,avg," << async_time_sum / nt << ',' << async_resid_sum / nt
                << '\n';
        }
        std::cout << "t=" << t << " done\n";
    }
    if (!out) throw io_error("write failed: " + args.out);
    return kExitOk;
}

int run_experiment(const ExperimentArgs& args) {
    if (args.reps < 1) throw CLI::ValidationError("--reps", "repetitions must be >= 1");
    const rich::SolverOrder order =
        args.order == "second" ? rich::SolverOrder::second : rich::SolverOrder::first;

    const rich::SplittingSystem sys = make_system(args.m, "", args.seed);
    sys.require_nonnegative();

    rich::IterParams params{args.alpha, args.beta, {}};
    if (args.optimal_beta) {
        const double rho = measured_rho(sys);
        const rich::OptimalParams opt =
            rich::optimal_second_order(rich::SpectrumBounds::from_rho(rho));
        params.alpha = opt.alpha;
        params.beta = opt.beta;
        std::cout << "optimal params: alpha=" << params.alpha << " beta=" << params.beta << "\n";
    }

    if (args.mode == "table") return run_experiment_table(args, sys, params, order);
    if (args.mode == "timing") return run_experiment_timing(args, sys, params, order);
    throw CLI::ValidationError("--mode", "expected table or timing");
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::size_t m = 10;
    std::string order = "second";
    double alpha = 1.0;
    double beta = 0.0;
    bool optimal_beta = false;
    std::string schedule = "random";
    std::vector<std::size_t> delay_bounds{0, 10, 50};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    double update_prob = 0.5;
    std::size_t horizon = 50000;
    std::size_t stride = 100;
    std::uint64_t rhs_seed = 1;
    std::string out = "simulate.csv";
    std::string dump_schedule_path;
};

int run_simulate(const SimulateArgs& args) {
    const rich::SplittingSystem sys = make_system(args.m, "", args.rhs_seed);
    sys.require_nonnegative();

    rich::IterParams params{args.alpha, args.beta, {}};
    if (args.optimal_beta) {
        const double rho = measured_rho(sys);
        const rich::OptimalParams opt =
            rich::optimal_second_order(rich::SpectrumBounds::from_rho(rho));
        params.alpha = opt.alpha;
        params.beta = opt.beta;
    }
    const bool second = args.order == "second";
    const std::size_t dim = second ? 2 * sys.n : sys.n;

    if (!args.dump_schedule_path.empty()) {
        rich::Schedule schedule =
            rich::Schedule::bounded_random(args.horizon, args.delay_bounds.front(),
                                           args.update_prob, args.seeds.front());
        if (args.schedule == "sync") schedule = rich::Schedule::synchronous(args.horizon);
        if (args.schedule == "cyclic") schedule = rich::Schedule::cyclic(args.horizon);
        auto dump = open_output(args.dump_schedule_path);
        rich::dump_schedule(dump, schedule, dim);
    }

    auto out = open_output(args.out);
    if (args.schedule == "random") {
        const auto rows = rich::asynchrony_sweep(sys, params, args.delay_bounds, args.seeds,
                                                 args.horizon, args.update_prob, args.stride);
        rich::write_sweep_csv(out, rows);
        std::size_t diverged = 0;
        for (const auto& row : rows) diverged += row.diverged ? 1 : 0;
        std::cout << diverged << "/" << rows.size() << " runs diverged\n";
        return kExitOk;
    }

    rich::Schedule schedule = args.schedule == "cyclic" ? rich::Schedule::cyclic(args.horizon)
                                                        : rich::Schedule::synchronous(args.horizon);
    if (args.schedule != "sync" && args.schedule != "cyclic") {
        throw CLI::ValidationError("--schedule", "expected sync, cyclic or random");
    }
    const rich::SimTrace trace = second
                                     ? rich::simulate_second_order(sys, params, schedule, args.stride)
                                     : rich::simulate_first_order(sys, params, schedule, args.stride);
    trace.write_csv(out);
    std::cout << "final rel resid " << trace.final_residual()
              << (trace.diverged ? " (diverged)" : "") << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- validate

int run_validate(const std::string& aggregate_path, const std::string& runs_path) {
    std::ifstream runs(runs_path);
    if (!runs) throw io_error("cannot open " + runs_path);
    std::string line;
    std::getline(runs, line); // header

    struct Bucket {
        double range_sum = 0.0, resid_sum = 0.0, time_sum = 0.0;
        std::size_t failures = 0, count = 0;
    };
    std::map<std::size_t, Bucket> buckets;
    long lineno = 1;
    while (std::getline(runs, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::size_t threads, run, lo, hi, range;
        double resid, time;
        int failed;
        char comma;
        if (!(row >> threads >> comma >> run >> comma >> lo >> comma >> hi >> comma >> range >>
              comma >> resid >> comma >> failed >> comma >> time)) {
            throw rich::parse_error(lineno, "malformed runs row");
        }
        if (range != hi - lo) {
            std::cerr << "validate: range mismatch at line " << lineno << "\n";
            return kExitUsage;
        }
        const bool expect_failed = !(resid <= 1.0);
        if (expect_failed != (failed != 0)) {
            std::cerr << "validate: failed flag mismatch at line " << lineno << "\n";
            return kExitUsage;
        }
        Bucket& b = buckets[threads];
        b.range_sum += static_cast<double>(range);
        b.resid_sum += resid;
        b.time_sum += time;
        b.failures += failed ? 1 : 0;
        b.count += 1;
    }

    std::ifstream agg(aggregate_path);
    if (!agg) throw io_error("cannot open " + aggregate_path);
    std::getline(agg, line); // header
    lineno = 1;
    while (std::getline(agg, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::size_t threads, failures;
        double avg_range, avg_resid, async_time, sync_time;
        char comma;
        if (!(row >> threads >> comma >> avg_range >> comma >> avg_resid >> comma >> failures >>
              comma >> async_time >> comma >> sync_time)) {
            throw rich::parse_error(lineno, "malformed aggregate row");
        }
        const auto it = buckets.find(threads);
        if (it == buckets.end()) {
            std::cerr << "validate: no raw runs for threads=" << threads << "\n";
            return kExitUsage;
        }
        const Bucket& b = it->second;
        const double n = static_cast<double>(b.count);
        const auto close = [](double x, double y) {
            return std::abs(x - y) <= 1e-9 * std::max({std::abs(x), std::abs(y), 1.0});
        };
        if (b.failures != failures || !close(b.range_sum / n, avg_range) ||
            !close(b.resid_sum / n, avg_resid)) {
            std::cerr << "validate: aggregate mismatch for threads=" << threads << "\n";
            return kExitUsage;
        }
    }
    std::cout << "validate: OK\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Richardson solver laboratory"};
    app.require_subcommand(1);

    SpectraArgs spectra;
    auto* spectra_cmd = app.add_subcommand("spectra", "Spectral radius and parameter report");
    spectra_cmd->add_option("--m", spectra.m, "Laplacian grid size");
    spectra_cmd->add_option("--matrix", spectra.matrix_path, "Matrix Market input file");
    auto* sa = spectra_cmd->add_option("--alpha", spectra.alpha, "check this alpha");
    auto* sb = spectra_cmd->add_option("--beta", spectra.beta, "check this beta");
    spectra_cmd->callback([&] {
        spectra.have_params = (*sa) || (*sb);
    });

    ContourArgs contour;
    auto* contour_cmd = app.add_subcommand("contour", "Spectral radius grid over (alpha, beta)");
    contour_cmd->add_option("--rho", contour.rho, "spectral radius of T")->required();
    contour_cmd->add_option("--alpha-min", contour.alpha_min);
    contour_cmd->add_option("--alpha-max", contour.alpha_max);
    contour_cmd->add_option("--beta-min", contour.beta_min);
    contour_cmd->add_option("--beta-max", contour.beta_max);
    contour_cmd->add_option("--resolution", contour.resolution)->check(CLI::Range(2, 4096));
    contour_cmd->add_option("--out", contour.out, "output CSV path");

    ExperimentArgs exp;
    auto* exp_cmd = app.add_subcommand("experiment", "Asynchronous runtime experiments");
    exp_cmd->set_config("--config", "", "key = value config file; flags override");
    exp_cmd->add_option("--m", exp.m, "Laplacian grid size");
    exp_cmd->add_option("--order", exp.order)->check(CLI::IsMember({"first", "second"}));
    exp_cmd->add_option("--alpha", exp.alpha);
    exp_cmd->add_option("--beta", exp.beta);
    exp_cmd->add_flag("--optimal-beta", exp.optimal_beta, "use Frankel-optimal (alpha, beta)");
    exp_cmd->add_option("--threads", exp.threads, "thread counts")->delimiter(',');
    exp_cmd->add_option("--reps", exp.reps, "repetitions per thread count");
    exp_cmd->add_option("--target-updates", exp.target_updates, "average updates per unknown");
    exp_cmd->add_option("--partition", exp.partition, partition_spec_help());
    exp_cmd->add_option("--seed", exp.seed, "RHS seed");
    exp_cmd->add_option("--out", exp.out, "output CSV path");
    exp_cmd->add_option("--mode", exp.mode)->check(CLI::IsMember({"table", "timing"}));
    exp_cmd->add_option("--t-list", exp.t_list, "iteration counts for timing mode")->delimiter(',');
    exp_cmd->add_option("--tests-per-t", exp.tests_per_t);
    exp_cmd->add_flag("--pin", exp.pin, "best-effort scatter thread affinity");

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Deterministic asynchrony simulator");
    sim_cmd->set_config("--config", "", "key = value config file; flags override");
    sim_cmd->add_option("--m", sim.m, "Laplacian grid size");
    sim_cmd->add_option("--order", sim.order)->check(CLI::IsMember({"first", "second"}));
    sim_cmd->add_option("--alpha", sim.alpha);
    sim_cmd->add_option("--beta", sim.beta);
    sim_cmd->add_flag("--optimal-beta", sim.optimal_beta);
    sim_cmd->add_option("--schedule", sim.schedule)->check(CLI::IsMember({"sync", "cyclic", "random"}));
    sim_cmd->add_option("--B", sim.delay_bounds, "delay bounds for random schedules")->delimiter(',');
    sim_cmd->add_option("--seeds", sim.seeds, "schedule seeds")->delimiter(',');
    sim_cmd->add_option("--update-prob", sim.update_prob)->check(CLI::Range(0.0, 1.0));
    sim_cmd->add_option("--horizon", sim.horizon, "instants to simulate");
    sim_cmd->add_option("--stride", sim.stride, "residual sampling stride");
    sim_cmd->add_option("--seed", sim.rhs_seed, "RHS seed");
    sim_cmd->add_option("--out", sim.out, "output CSV path");
    sim_cmd->add_option("--dump-schedule", sim.dump_schedule_path,
                        "write the realized schedule as k;J_k;delays lines");

    std::string validate_aggregate, validate_runs;
    auto* validate_cmd = app.add_subcommand("validate", "Re-check derived columns of experiment CSVs");
    validate_cmd->add_option("--aggregate", validate_aggregate)->required();
    validate_cmd->add_option("--runs", validate_runs)->required();

    try {
        app.parse(argc, argv);
        if (spectra_cmd->parsed()) return run_spectra(spectra);
        if (contour_cmd->parsed()) return run_contour(contour);
        if (exp_cmd->parsed()) return run_experiment(exp);
        if (sim_cmd->parsed()) return run_simulate(sim);
        if (validate_cmd->parsed()) return run_validate(validate_aggregate, validate_runs);
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const rich::splitting_error& e) {
        std::cerr << "numerical assumption violated: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const rich::certification_error& e) {
        std::cerr << "numerical assumption violated: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const rich::singular_preconditioner_error& e) {
        std::cerr << "numerical assumption violated: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const rich::parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitIo;
    } catch (const io_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
