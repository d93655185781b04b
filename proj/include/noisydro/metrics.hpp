#pragma once
#include "noisydro/dro.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace noisydro {

// POA(eps) = (SYSTEM - g*(eps)) / SYSTEM. Requires SYSTEM > 0.
double price_of_ambiguity(double system, double g_star);

// POF(alpha) = (SYSTEM_F - FAIR(alpha)) / SYSTEM_F. Requires SYSTEM_F > 0.
double price_of_fairness(double system_f, double fair_value);

// max_i w_i - min_i w_i; equity proxy over allocations, 0 iff uniform.
double dispersion(std::span<const double> w);
double dispersion(const Allocation& w);

struct ShadowPricePoint {
    double epsilon = 0.0;
    double fd_slope = 0.0;
    double minus_lambda_star = 0.0;
    double gap = 0.0; // |fd_slope + lambda_star|
};

// Central finite difference of g*(eps) against -lambda*(eps). Kink detection
// (lambda jumps between neighbouring sweep points) is left to the caller.
std::vector<ShadowPricePoint> shadow_price_check(const DROProblem& problem,
                                                 const std::vector<double>& epsilons,
                                                 double h = 1e-3,
                                                 const SolverConfig& config = {});

struct SweepRow {
    double epsilon = 0.0;
    double alpha = 0.0;
    Mode mode = Mode::Direct;
    std::string kernel;
    double g_star = 0.0;
    double lambda_star = 0.0;
    double poa = 0.0; // NaN when the SYSTEM baseline is nonpositive
    double pof = 0.0; // NaN when the per-mode SYSTEM_F baseline is nonpositive
    double dispersion = 0.0;
    bool converged = false;
    bool lambda_at_cap = false;
    std::vector<double> w;
};

// Results of a full (epsilon, alpha, mode) sweep with its baselines.
// `system` is the SAA value at alpha = 0; POA rows use the SAA baseline at
// the row's own alpha (shared by both modes), POF rows use the mode's DRO
// value at alpha = 0 and the row's epsilon.
struct MetricsReport {
    double system = 0.0;
    std::map<double, double> system_by_alpha;
    std::map<std::pair<int, double>, double> system_f; // (mode index, epsilon)
    std::vector<SweepRow> rows;                        // sorted by (epsilon, alpha, mode)
};

// Solves every (epsilon, alpha, mode) cell; cells run in parallel and rows
// come out in canonical order regardless of thread count.
MetricsReport run_sweep(const NoisyDataset& dataset, const NoiseKernel& kernel,
                        const SupportGrid& grid, const std::vector<double>& epsilons,
                        const std::vector<double>& alphas, const std::vector<Mode>& modes,
                        const SolverConfig& config = {});

} // namespace noisydro
