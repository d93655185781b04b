#pragma once
#include "noisydro/dro.hpp"
#include "noisydro/metrics.hpp"
#include "noisydro/noise.hpp"
#include "noisydro/stats.hpp"
#include "noisydro/support.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

// Configuration loading and the CSV formats the tool emits. Kept apart from
// main() so the formats can be unit-tested.
namespace noisydro::cli {

struct KernelSpec {
    std::string family = "uniform";
    double a = -0.01;
    double b = 0.01;
    double mu = 0.0;
    double sigma = 0.01;
    double p = 0.5;
    int m = 2;
    double rate = 0.1;
    int k_max = 8;
    double diam = 0.0; // 0 => dimension of the data (l1 diameter of [0,1]^n)
    int levels = 3;
};

NoiseKernel make_kernel(const KernelSpec& spec, std::size_t dim);

struct GridSpec {
    double lo = 0.0;
    double hi = 1.0;
    int levels = 5;
};

struct WorldSpec {
    GridSpec grid;
    std::vector<double> pmf; // empty => uniform
    KernelSpec kernel;
    double alpha = 0.0;
};

struct StatsConfig {
    std::vector<int> Ns{20, 50, 100, 200};
    std::vector<double> betas{0.05};
    int trials = 200;
    double c1 = 2.718281828459045;
    double c2 = 0.0; // 0 => calibrate at the smallest N
    double a = 2.0;
    double consistency_beta0 = 0.05;
    std::vector<int> consistency_Ns{10, 100, 1000};
    std::vector<double> deltas{0.005, 0.01, 0.02};
    int biased_N = 30;
    double biased_epsilon = 0.05;
    WorldSpec world;
};

struct ExperimentConfig {
    std::string dataset_path;
    std::string base_station;
    std::string assemble = "user_types"; // or "scalar"
    KernelSpec kernel;
    GridSpec grid;
    std::vector<double> epsilons; // default: 10 points in [0.01, 0.1]
    std::vector<double> alphas{0, 1, 2, 5, 10, 20, 100};
    std::vector<Mode> modes{Mode::Direct, Mode::Noisy};
    SolverConfig solver;
    StatsConfig stats;
    std::string out_dir = "out";
    std::uint64_t seed = 42;
};

// Parses the JSON config file. Throws config_error on malformed or
// inconsistent content.
ExperimentConfig load_config(const std::string& path);

NoisyDataset load_dataset(const ExperimentConfig& config);
SyntheticWorld make_world(const StatsConfig& stats, std::uint64_t seed);

// Results CSV: epsilon,alpha,mode,kernel,g_star,lambda_star,poa,pof,
// dispersion,converged,w_1,...,w_n. POA/POF cells are blank when their
// baseline is nonpositive.
void write_results_csv(std::ostream& out, const MetricsReport& report, std::size_t dim);

struct PlotRow {
    std::string x;
    std::string series;
    std::string value;
    std::string panel;
};

// Long-format rows for external plotting: one row per (result row, metric).
std::vector<PlotRow> plotdata_rows(std::istream& results_csv);
void write_plotdata_csv(std::ostream& out, const std::vector<PlotRow>& rows);

std::string format_double(double v);

} // namespace noisydro::cli
