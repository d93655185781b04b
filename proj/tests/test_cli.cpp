#include "doctest.h"

#include "cli_lib.hpp"
#include "noisydro/errors.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace noisydro;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << body;
    return path;
}

} // namespace

TEST_CASE("load_config defaults and overrides") {
    const auto path = write_temp("noisydro_cfg1.json", R"({
        "dataset": {"path": "d.csv", "base_station": "BS1"},
        "kernel": {"family": "bernoulli", "params": {"p": 0.25, "a": 0.01}},
        "alphas": [0, 2],
        "modes": ["direct"],
        "seed": 7
    })");
    const auto cfg = cli::load_config(path.string());
    std::filesystem::remove(path);

    CHECK(cfg.dataset_path == "d.csv");
    CHECK(cfg.base_station == "BS1");
    CHECK(cfg.kernel.family == "bernoulli");
    CHECK(cfg.kernel.p == 0.25);
    CHECK(cfg.alphas == std::vector<double>{0, 2});
    REQUIRE(cfg.modes.size() == 1);
    CHECK(cfg.modes[0] == Mode::Direct);
    CHECK(cfg.seed == 7);
    // defaults: 10 epsilon points in [0.01, 0.1], 5-level grid
    REQUIRE(cfg.epsilons.size() == 10);
    CHECK(cfg.epsilons.front() == doctest::Approx(0.01));
    CHECK(cfg.epsilons.back() == doctest::Approx(0.1));
    CHECK(cfg.grid.levels == 5);
}

TEST_CASE("load_config rejects bad content") {
    const auto not_json = write_temp("noisydro_cfg2.json", "{nope");
    CHECK_THROWS_AS(cli::load_config(not_json.string()), config_error);
    std::filesystem::remove(not_json);

    const auto bad_mode = write_temp("noisydro_cfg3.json",
                                     R"({"modes": ["sideways"]})");
    CHECK_THROWS_AS(cli::load_config(bad_mode.string()), config_error);
    std::filesystem::remove(bad_mode);

    const auto bad_eps = write_temp("noisydro_cfg4.json", R"({"epsilons": [-0.1]})");
    CHECK_THROWS_AS(cli::load_config(bad_eps.string()), config_error);
    std::filesystem::remove(bad_eps);

    CHECK_THROWS_AS(cli::load_config("/nonexistent/cfg.json"), config_error);
}

TEST_CASE("make_kernel covers every family named in the config schema") {
    // continuous families read (a, b) as support bounds
    for (const char* family : {"dirac", "uniform", "truncated_normal", "softmax"}) {
        cli::KernelSpec spec;
        spec.family = family;
        const auto k = cli::make_kernel(spec, 2);
        CHECK(k.dim == 2);
        CHECK_NOTHROW(k.validate());
    }
    // counting families read a as the nonnegative step size
    for (const char* family : {"bernoulli", "binomial", "poisson"}) {
        cli::KernelSpec spec;
        spec.family = family;
        spec.a = 0.01;
        const auto k = cli::make_kernel(spec, 2);
        CHECK(k.dim == 2);
        CHECK_NOTHROW(k.validate());
    }
    cli::KernelSpec bad;
    bad.family = "cauchy";
    CHECK_THROWS_AS(cli::make_kernel(bad, 2), config_error);
}

TEST_CASE("results CSV layout and byte determinism") {
    const std::string data = std::string(NOISYDRO_DATA_DIR) + "/sample_sara.csv";
    const auto ds = ingest_user_type_matrix(data, "BS2");
    const auto grid = build_support_grid(0.0, 1.0, 5, ds.dim);
    const auto kernel = make_uniform(-0.01, 0.01, 3, ds.dim);
    const std::vector<double> eps{0.02, 0.06};
    const std::vector<double> alphas{0.0, 1.0};
    const std::vector<Mode> modes{Mode::Direct, Mode::Noisy};

    const auto report = run_sweep(ds, kernel, grid, eps, alphas, modes);
    std::ostringstream first, second;
    cli::write_results_csv(first, report, ds.dim);
    cli::write_results_csv(second, run_sweep(ds, kernel, grid, eps, alphas, modes), ds.dim);
    CHECK(first.str() == second.str());

    std::istringstream in(first.str());
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "epsilon,alpha,mode,kernel,g_star,lambda_star,poa,pof,dispersion,converged,"
          "w_1,w_2,w_3");
    std::size_t lines = 0;
    for (std::string line; std::getline(in, line);) ++lines;
    CHECK(lines == eps.size() * alphas.size() * modes.size());

    SUBCASE("noisy rows dominate direct rows at the CLI layer") {
        for (std::size_t i = 0; i + 1 < report.rows.size(); i += 2)
            CHECK(report.rows[i + 1].g_star >= report.rows[i].g_star - 1e-6);
    }
    SUBCASE("plotdata round-trips every row") {
        std::istringstream results(first.str());
        const auto rows = cli::plotdata_rows(results);
        // at least one long row per (result row, metric), minus blank cells
        CHECK(rows.size() >= report.rows.size() * 6);
        std::ostringstream plot;
        cli::write_plotdata_csv(plot, rows);
        std::istringstream parse(plot.str());
        std::string head;
        std::getline(parse, head);
        CHECK(head == "x,series,value,panel");
        std::size_t n = 0;
        for (std::string line; std::getline(parse, line);) ++n;
        CHECK(n == rows.size());
    }
}

TEST_CASE("plotdata on an empty results file") {
    std::istringstream in(
        "epsilon,alpha,mode,kernel,g_star,lambda_star,poa,pof,dispersion,converged,w_1\n");
    const auto rows = cli::plotdata_rows(in);
    CHECK(rows.empty());
    std::ostringstream out;
    cli::write_plotdata_csv(out, rows);
    CHECK(out.str() == "x,series,value,panel\n");
}

TEST_CASE("plotdata rejects malformed input") {
    std::istringstream empty("");
    CHECK_THROWS_AS(cli::plotdata_rows(empty), data_error);
    std::istringstream bad_header("a,b,c\n");
    CHECK_THROWS_AS(cli::plotdata_rows(bad_header), data_error);
    std::istringstream ragged(
        "epsilon,alpha,mode,kernel,g_star,lambda_star,poa,pof,dispersion,converged,w_1\n"
        "0.01,0,direct\n");
    CHECK_THROWS_AS(cli::plotdata_rows(ragged), data_error);
}

TEST_CASE("synthetic world from config") {
    cli::StatsConfig stats;
    stats.world.pmf = {0.1, 0.2, 0.4, 0.2, 0.1};
    const auto world = cli::make_world(stats, 11);
    CHECK(world.grid.size() == 5);
    CHECK(world.seed == 11);
    CHECK_NOTHROW(world.validate());
    SUBCASE("uniform pmf by default") {
        cli::StatsConfig plain;
        const auto w2 = cli::make_world(plain, 0);
        for (double p : w2.pmf) CHECK(p == doctest::Approx(0.2));
    }
    SUBCASE("bad pmf rejected") {
        cli::StatsConfig bad;
        bad.world.pmf = {0.5, 0.5};
        CHECK_THROWS_AS(cli::make_world(bad, 0), invalid_input_error);
    }
}
