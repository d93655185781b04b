#pragma once
#include "noisydro/dro.hpp"
#include "noisydro/noise.hpp"
#include "noisydro/rng.hpp"
#include "noisydro/support.hpp"
#include "noisydro/utility.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace noisydro {

// Radius schedule of the measure-concentration bound. The constants c1, c2
// and the tail exponent a are user parameters; see calibrate_c2 for a data
// driven choice of c2.
struct EpsilonSchedule {
    double c1 = 0.0;
    double c2 = 0.0;
    double a = 2.0;
    std::size_t n = 1;

    // Throws on hard violations; prints a warning for n == 2, which the
    // concentration bound behind the schedule excludes (the formula stays
    // usable).
    void validate() const;
};

// Smallest ball radius at confidence 1 - beta:
//   (log(c1/beta) / (c2 N))^(1/max(n,2))  when N >= log(c1/beta)/c2,
//   (log(c1/beta) / (c2 N))^(1/a)         otherwise.
double epsilon_n(const EpsilonSchedule& schedule, double beta, std::int64_t N);

// Order-1 Wasserstein distance under the l1 ground cost between two
// equal-weight empirical distributions. Exact: sorted-sample matching in one
// dimension (any sizes), optimal assignment for equal sizes up to 200 points
// in higher dimension.
double wasserstein1_empirical(const std::vector<std::vector<double>>& P,
                              const std::vector<std::vector<double>>& Q);

// Exact 1-D distance between weighted discrete distributions via cumulative
// mass matching.
double wasserstein1_discrete_1d(std::span<const double> xs, std::span<const double> px,
                                std::span<const double> ys, std::span<const double> py);

// Finite synthetic ground truth: a latent pmf on a grid pushed through a
// noise kernel.
struct SyntheticWorld {
    SupportGrid grid;
    std::vector<double> pmf;
    NoiseKernel kernel;
    FairnessUtility utility;
    std::uint64_t seed = 0;

    void validate() const;
};

// Optimal value of the stochastic program under the exact latent pmf.
double g_star_so(const SyntheticWorld& world, const SolverConfig& config = {});

// N i.i.d. draws of latent-plus-noise.
NoisyDataset sample_noisy_dataset(const SyntheticWorld& world, int N, Rng& rng);

// Per-trial Wasserstein distances between the noisy marginal and an
// empirical of N draws (1-D worlds only). With ref_factor = 0 the exact
// discrete marginal is used; ref_factor >= 1 approximates it by a reference
// empirical of ref_factor * N draws instead. `stream_index` separates the
// rng streams of independent batches.
std::vector<double> coverage_distances(const SyntheticWorld& world, int N, int trials,
                                       std::uint64_t stream_index = 0, int ref_factor = 0);

struct CoveragePoint {
    int N = 0;
    double epsilon = 0.0;
    double fraction = 0.0;
};

// Fraction of trials whose empirical-to-marginal distance falls inside the
// schedule radius, per sample count.
std::vector<CoveragePoint> coverage_experiment(const SyntheticWorld& world,
                                               const EpsilonSchedule& schedule, double beta,
                                               const std::vector<int>& Ns, int trials);

struct ConsistencyPoint {
    int N = 0;
    double beta_N = 0.0;
    double epsilon_N = 0.0;
    double g_hat = 0.0;
    double g_so = 0.0;
    double abs_err = 0.0;
};

// Solves the noisy-data problem along N with the summable-confidence radius
// beta_N = beta0 / N^2 and records |g_hat - g*_SO|.
std::vector<ConsistencyPoint> consistency_experiment(const SyntheticWorld& world,
                                                     const EpsilonSchedule& schedule,
                                                     double beta0,
                                                     const std::vector<int>& Ns,
                                                     const SolverConfig& config = {});

struct BiasedBoundPoint {
    double delta = 0.0;
    double g_noisy_biased = 0.0;
    double g_direct = 0.0;
    double lambda_direct = 0.0;
    bool bound_ok = false;
};

// Checks g_noisy_biased >= g_direct - lambda_direct * delta over kernels
// shifted by a constant bias of l1 norm delta.
std::vector<BiasedBoundPoint> biased_bound_experiment(const SyntheticWorld& world,
                                                      const std::vector<double>& delta_grid,
                                                      int N = 30, double epsilon = 0.05,
                                                      const SolverConfig& config = {});

// Fits c2 so that the schedule radius at the pilot N matches the empirical
// (1 - beta) quantile of the coverage distances.
double calibrate_c2(const SyntheticWorld& world, double c1, double beta, int pilot_N,
                    int trials, double a = 2.0);

} // namespace noisydro
