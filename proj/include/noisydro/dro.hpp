#pragma once
#include "noisydro/noise.hpp"
#include "noisydro/support.hpp"
#include "noisydro/utility.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace noisydro {

// Direct treats the observed samples as noise-free (Dirac kernel); Noisy
// prices transport through the declared noise kernel.
enum class Mode { Direct, Noisy };

const char* mode_name(Mode m);

// One fully specified robust allocation problem over a finite latent grid.
struct DROProblem {
    NoisyDataset dataset;
    NoiseKernel kernel;
    SupportGrid grid; // latent support
    FairnessUtility utility;
    double epsilon = 0.0;
    Mode mode = Mode::Direct;

    void validate() const;
};

// c[j][k] >= 0: expected transport cost between sample j and grid point k.
// For a Dirac kernel each entry is exactly the l1 distance.
struct CostMatrix {
    std::size_t rows = 0; // N samples
    std::size_t cols = 0; // grid points
    std::vector<double> c;

    double at(std::size_t j, std::size_t k) const { return c[j * cols + k]; }
    void validate() const;
};

struct SolverConfig {
    int max_iters = 5000;      // supergradient ascent budget
    double step_c0 = 0.1;      // step rule c0 / sqrt(t)
    double stall_tol = 1e-8;   // best-value stall tolerance
    int stall_window = 200;    // iterations without improvement before stopping
    double lambda_max = 0.0;   // 0 => derive the cap from the utility Lipschitz bound
    bool polish = true;        // refine the best iterate with a cutting scheme
    int polish_iters = 0;      // 0 => budget chosen from the dimension
    double polish_gap_tol = 1e-9;
    std::uint64_t seed = 0;

    void validate() const;
};

struct DROSolution {
    Allocation w_star;
    double lambda_star = 0.0;
    double g_star = 0.0;
    std::vector<double> a;              // per-sample epigraph values at (w*, lambda*)
    std::vector<std::int32_t> argmin_x; // per-sample minimizing grid index
    int iterations = 0;
    bool converged = false;
    double supergradient_norm = 0.0;
    double lambda_cap = 0.0;
    bool lambda_at_cap = false; // multiplier pinned at the cap (e.g. noisy mode at eps ~ 0)
};

struct DualEval {
    double value = 0.0;
    std::vector<double> a;
    std::vector<std::int32_t> argmin;
};

struct SAAResult {
    double value = 0.0;
    Allocation w;
    int iterations = 0;
};

// Cap on the ascent domain for lambda: one plus the utility Lipschitz bound
// over the grid. Beyond the Lipschitz constant the inner minimum sits at the
// cost-minimizing grid point, so the cap is inactive whenever the problem is
// primal-feasible at the given radius.
double lambda_cap(const SupportGrid& grid, const FairnessUtility& utility);

CostMatrix build_cost_matrix(const DROProblem& problem);

// Dual objective of the reformulated program:
// value = -lambda * epsilon + mean_j a_j with
// a_j = min_k [U(w, grid_k) + lambda * c[j][k]], ties to the smallest k.
DualEval dual_objective(const DROProblem& problem, const CostMatrix& costs,
                        std::span<const double> w, double lambda);

// Projected supergradient ascent on the jointly concave dual over
// simplex x [0, lambda_cap], followed by an optional polish stage.
DROSolution solve_dro(const DROProblem& problem, const SolverConfig& config = {});
DROSolution solve_dro(const DROProblem& problem, const CostMatrix& costs,
                      const SolverConfig& config = {});

// Sample average approximation baseline: max_w (1/N) sum_j U(w, x_j).
SAAResult solve_saa(const NoisyDataset& dataset, const FairnessUtility& utility,
                    const SolverConfig& config = {});

// Same maximization with explicit point weights; used for exact expectations
// over a known finite distribution.
SAAResult solve_weighted_saa(const std::vector<std::vector<double>>& points,
                             const std::vector<double>& weights,
                             const FairnessUtility& utility,
                             const SolverConfig& config = {});

// Euclidean projection onto {w >= 0, sum w = 1} by sort-and-threshold.
std::vector<double> project_simplex(std::span<const double> v);

// Exhaustive max of the dual objective over a simplex lattice and a lambda
// grid. Desk-scale only (n <= 3, N <= 10, |grid| <= 10); larger instances
// throw size_guard_error.
double oracle_grid_solve(const DROProblem& problem, int w_grid_res,
                         const std::vector<double>& lambda_grid);

} // namespace noisydro
