#include "cli_lib.hpp"

#include "noisydro/errors.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace noisydro;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
};

cli::ExperimentConfig resolve_config(const CommonArgs& args) {
    cli::ExperimentConfig cfg = cli::load_config(args.config_path);
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.seed_set) cfg.seed = args.seed;
    if (args.jobs > 0) {
#ifdef _OPENMP
        omp_set_num_threads(args.jobs);
#endif
    }
    cfg.solver.seed = cfg.seed;
    return cfg;
}

std::ofstream open_output(const std::string& dir, const std::string& name) {
    fs::create_directories(dir);
    const fs::path path = fs::path(dir) / name;
    std::ofstream out(path);
    if (!out) throw data_error("cannot write output file: " + path.string());
    return out;
}

int cmd_solve(const CommonArgs& args) {
    const auto cfg = resolve_config(args);
    const auto dataset = cli::load_dataset(cfg);
    const auto grid =
        build_support_grid(cfg.grid.lo, cfg.grid.hi, cfg.grid.levels, dataset.dim);
    const auto kernel = cli::make_kernel(cfg.kernel, dataset.dim);

    const auto report =
        run_sweep(dataset, kernel, grid, cfg.epsilons, cfg.alphas, cfg.modes, cfg.solver);

    auto out = open_output(cfg.out_dir, "results.csv");
    cli::write_results_csv(out, report, dataset.dim);

    std::cout << "station " << dataset.provenance << ": N=" << dataset.size()
              << " dim=" << dataset.dim << "\n";
    std::cout << "SYSTEM (SAA, alpha=0) = " << cli::format_double(report.system) << "\n";
    for (const auto& [key, value] : report.system_f)
        std::cout << "SYSTEM_F[" << mode_name(static_cast<Mode>(key.first))
                  << ", eps=" << cli::format_double(key.second)
                  << "] = " << cli::format_double(value) << "\n";
    std::cout << report.rows.size() << " rows -> " << cfg.out_dir << "/results.csv\n";

    std::size_t capped = 0;
    for (const auto& row : report.rows) {
        if (row.lambda_at_cap) ++capped;
        if (!row.converged) {
            std::cout << "warning: unconverged cell at eps=" << row.epsilon
                      << " alpha=" << row.alpha << " mode=" << mode_name(row.mode) << "\n";
        }
    }
    if (capped > 0)
        std::cout << "note: " << capped
                  << " row(s) report the multiplier at its cap; at such radii no "
                     "grid-supported latent distribution reaches the samples and the "
                     "value is the capped program's optimum\n";
    return kExitOk;
}

int cmd_saa(const CommonArgs& args) {
    const auto cfg = resolve_config(args);
    const auto dataset = cli::load_dataset(cfg);

    auto out = open_output(cfg.out_dir, "saa.csv");
    out << "alpha,system\n";
    std::cout << "station " << dataset.provenance << ": N=" << dataset.size() << "\n";
    double system0 = 0.0;
    for (double alpha : cfg.alphas) {
        const auto res = solve_saa(dataset, FairnessUtility{alpha, dataset.dim}, cfg.solver);
        if (alpha == 0.0) system0 = res.value;
        out << cli::format_double(alpha) << ',' << cli::format_double(res.value) << "\n";
        std::cout << "SYSTEM(alpha=" << cli::format_double(alpha)
                  << ") = " << cli::format_double(res.value) << "\n";
    }
    std::cout << "SYSTEM_F at eps=0 coincides with SYSTEM per mode: "
              << cli::format_double(system0) << "\n";
    if (!(system0 > 0.0))
        std::cout << "warning: SYSTEM <= 0; POA/POF columns will be blank downstream\n";
    return kExitOk;
}

int cmd_stats(const CommonArgs& args) {
    const auto cfg = resolve_config(args);
    const auto world = cli::make_world(cfg.stats, cfg.seed);

    double c2 = cfg.stats.c2;
    if (!(c2 > 0.0)) {
        const int pilot = *std::min_element(cfg.stats.Ns.begin(), cfg.stats.Ns.end());
        c2 = calibrate_c2(world, cfg.stats.c1, cfg.stats.betas.front(), pilot,
                          cfg.stats.trials, cfg.stats.a);
        std::cout << "calibrated c2 = " << cli::format_double(c2) << " (pilot N=" << pilot
                  << ")\n";
    }
    const EpsilonSchedule schedule{cfg.stats.c1, c2, cfg.stats.a, world.grid.dim};

    {
        auto out = open_output(cfg.out_dir, "coverage.csv");
        out << "N,beta,epsilon,coverage\n";
        for (double beta : cfg.stats.betas) {
            const auto pts =
                coverage_experiment(world, schedule, beta, cfg.stats.Ns, cfg.stats.trials);
            for (const auto& p : pts)
                out << p.N << ',' << cli::format_double(beta) << ','
                    << cli::format_double(p.epsilon) << ',' << cli::format_double(p.fraction)
                    << "\n";
        }
    }
    {
        auto out = open_output(cfg.out_dir, "consistency.csv");
        out << "N,beta_N,epsilon_N,g_hat,g_so,abs_err\n";
        const auto pts = consistency_experiment(world, schedule, cfg.stats.consistency_beta0,
                                                cfg.stats.consistency_Ns, cfg.solver);
        for (const auto& p : pts)
            out << p.N << ',' << cli::format_double(p.beta_N) << ','
                << cli::format_double(p.epsilon_N) << ',' << cli::format_double(p.g_hat)
                << ',' << cli::format_double(p.g_so) << ',' << cli::format_double(p.abs_err)
                << "\n";
    }
    {
        auto out = open_output(cfg.out_dir, "biased_bound.csv");
        out << "delta,g_noisy_biased,g_direct,lambda_direct,bound_ok\n";
        const auto pts = biased_bound_experiment(world, cfg.stats.deltas, cfg.stats.biased_N,
                                                 cfg.stats.biased_epsilon, cfg.solver);
        for (const auto& p : pts)
            out << cli::format_double(p.delta) << ',' << cli::format_double(p.g_noisy_biased)
                << ',' << cli::format_double(p.g_direct) << ','
                << cli::format_double(p.lambda_direct) << ','
                << (p.bound_ok ? "true" : "false") << "\n";
    }
    std::cout << "coverage.csv, consistency.csv, biased_bound.csv -> " << cfg.out_dir
              << "\n";
    return kExitOk;
}

int cmd_plotdata(const std::string& input, const std::string& out_dir) {
    std::ifstream in(input);
    if (!in) throw data_error("cannot open results file: " + input);
    const auto rows = cli::plotdata_rows(in);
    auto out = open_output(out_dir.empty() ? "out" : out_dir, "plotdata.csv");
    cli::write_plotdata_csv(out, rows);
    std::cout << rows.size() << " rows -> plotdata.csv\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"noisy-data distributionally robust allocation"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string plot_input;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("--config", args.config_path, "experiment config (JSON)");
        if (needs_config) opt->required();
        sub->add_option("--out", args.out_dir, "output directory");
        sub->add_option("--seed", args.seed, "rng seed override")
            ->each([&](const std::string&) { args.seed_set = true; });
        sub->add_option("--jobs", args.jobs, "worker thread count");
    };

    auto* solve = app.add_subcommand("solve", "sweep (epsilon, alpha, mode) and emit results");
    add_common(solve, true);
    auto* saa = app.add_subcommand("saa", "SAA baselines (SYSTEM / SYSTEM_F)");
    add_common(saa, true);
    auto* stats = app.add_subcommand("stats", "coverage / consistency / biased-bound runs");
    add_common(stats, true);
    auto* plotdata = app.add_subcommand("plotdata", "reshape a results CSV for plotting");
    plotdata->add_option("input", plot_input, "results.csv from solve")->required();
    plotdata->add_option("--out", args.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (solve->parsed()) return cmd_solve(args);
        if (saa->parsed()) return cmd_saa(args);
        if (stats->parsed()) return cmd_stats(args);
        if (plotdata->parsed()) return cmd_plotdata(plot_input, args.out_dir);
        return kExitUsage;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const degenerate_range_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
}
