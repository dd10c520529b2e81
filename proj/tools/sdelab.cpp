// Config-driven front door: classify regimes, run ensembles, scan the
// expectation identity, and execute the verification battery.
//
// Exit codes: 0 success, 1 acceptance failure, 2 simulation fault,
// 3 quadrature accuracy fault, 4 configuration error.

#include "sdelab/acceptance.hpp"
#include "sdelab/config.hpp"
#include "sdelab/errors.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

struct CommonArgs {
    std::string config_path;
    std::int64_t seed_override = -1;
    int threads = 0;
    bool force = false;
};

sdelab::ExperimentConfig load(const CommonArgs& args) {
    sdelab::ExperimentConfig cfg = sdelab::load_config_file(args.config_path);
    if (args.seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed_override);
    return cfg;
}

void apply_threads(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and verification laboratory for the recursion "
                 "x_{n+1} = x_n (1 + h f(x_n) + sqrt(h) g(x_n) xi_{n+1})"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string filter;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        if (needs_config)
            sub->add_option("--config", args.config_path, "experiment config file (JSON)")
                ->required();
        sub->add_option("--seed", args.seed_override, "override the master seed");
        sub->add_option("--threads", args.threads, "worker thread count (0 = default)");
        sub->add_flag("--force", args.force, "run statistics the regime/noise gating refuses");
    };

    CLI::App* regime = app.add_subcommand("regime", "classify the model and print the verdict");
    add_common(regime, true);

    CLI::App* simulate = app.add_subcommand("simulate", "run the ensemble, write path CSVs");
    add_common(simulate, true);

    CLI::App* report =
        app.add_subcommand("report", "simulate and write estimator rows to report.csv");
    add_common(report, true);

    CLI::App* ito = app.add_subcommand("ito", "expectation-identity scan over the h grid");
    add_common(ito, true);

    CLI::App* accept = app.add_subcommand("accept", "run the acceptance battery");
    accept->add_option("--seed", args.seed_override, "override the master seed");
    accept->add_option("--threads", args.threads, "worker thread count");
    accept->add_option("--filter", filter, "run a single criterion by id");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 4;
    }

    apply_threads(args.threads);

    try {
        if (regime->parsed()) {
            const auto cfg = load(args);
            const auto rep = sdelab::run_regime(cfg);
            std::cout << "case: " << sdelab::to_string(rep.case_tag) << '\n';
            std::cout << "beta (sup 2f/g^2): " << rep.beta << '\n';
            std::cout << "L (lim f/g^2 at 0): " << rep.L << '\n';
            if (rep.lambda)
                std::cout << "decay exponent lambda: " << *rep.lambda
                          << "  (ln|x_n|/ln n -> " << -1.0 / *rep.lambda << ")\n";
            if (rep.exact_constant)
                std::cout << "exact-rate constant: " << *rep.exact_constant << '\n';
            std::cout << "oscillatory: " << (rep.oscillatory ? "yes" : "no") << '\n';
            std::cout << rep.headline << '\n';
            if (!rep.note.empty()) std::cout << "note: " << rep.note << '\n';
            return 0;
        }
        if (simulate->parsed()) {
            const auto cfg = load(args);
            const auto run = sdelab::run_simulate(cfg, args.force);
            std::cout << "wrote " << run.records.size() << " path CSVs + summary.csv to "
                      << cfg.output_dir << '\n';
            return 0;
        }
        if (report->parsed()) {
            const auto cfg = load(args);
            const auto rows = sdelab::run_report(cfg, args.force);
            std::cout << "wrote " << rows.size() << " estimator rows to " << cfg.output_dir
                      << "/report.csv\n";
            return 0;
        }
        if (ito->parsed()) {
            const auto cfg = load(args);
            const auto res = sdelab::run_ito(cfg);
            for (const auto& r : res.reports)
                std::printf("h=%-10g lhs=%.12g rhs=%.12g err=%.6g norm_err=%.6g\n", r.h,
                            r.lhs, r.rhs, r.err, r.norm_err);
            if (!res.trend_checked)
                std::cout << "single-point grid: trend check skipped\n";
            else
                std::cout << (res.monotone ? "PASS: |norm_err| decreases along the grid\n"
                                           : "FAIL: |norm_err| is not decreasing\n");
            return 0;
        }
        if (accept->parsed()) {
            sdelab::AcceptanceOptions opts;
            if (args.seed_override >= 0)
                opts.master_seed = static_cast<std::uint64_t>(args.seed_override);
            opts.filter = filter;
            const auto results = sdelab::run_acceptance(opts);
            sdelab::print_acceptance(std::cout, results);
            return sdelab::all_pass(results) ? 0 : 1;
        }
    } catch (const sdelab::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 4;
    } catch (const sdelab::SimulationError& e) {
        std::cerr << "simulation fault: " << e.what() << '\n';
        return 2;
    } catch (const sdelab::AnalysisError& e) {
        std::cerr << "analysis fault: " << e.what() << '\n';
        return 2;
    } catch (const sdelab::AccuracyError& e) {
        std::cerr << "quadrature accuracy fault: " << e.what() << " (estimates "
                  << e.value_coarse << " vs " << e.value_fine << ")\n";
        return 3;
    }
    return 0;
}
