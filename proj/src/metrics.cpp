#include "noisydro/metrics.hpp"
#include "noisydro/errors.hpp"

#include <algorithm>
#include <exception>
#include <cmath>
#include <limits>
#include <set>

namespace noisydro {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double price_of_ambiguity(double system, double g_star) {
    if (!(system > 0.0))
        throw undefined_baseline_error("price_of_ambiguity: SYSTEM must be > 0");
    return (system - g_star) / system;
}

double price_of_fairness(double system_f, double fair_value) {
    if (!(system_f > 0.0))
        throw undefined_baseline_error("price_of_fairness: SYSTEM_F must be > 0");
    return (system_f - fair_value) / system_f;
}

double dispersion(std::span<const double> w) {
    if (w.empty()) throw invalid_input_error("dispersion: empty allocation");
    const auto [mn, mx] = std::minmax_element(w.begin(), w.end());
    return *mx - *mn;
}

double dispersion(const Allocation& w) {
    w.validate();
    return dispersion(std::span<const double>(w.w));
}

std::vector<ShadowPricePoint> shadow_price_check(const DROProblem& problem,
                                                 const std::vector<double>& epsilons,
                                                 double h, const SolverConfig& config) {
    if (!(h > 0.0)) throw invalid_input_error("shadow_price_check: h must be > 0");
    const CostMatrix costs = build_cost_matrix(problem);
    std::vector<ShadowPricePoint> out;
    out.reserve(epsilons.size());
    DROProblem p = problem;
    for (double eps : epsilons) {
        if (!(eps - h >= 0.0))
            throw invalid_input_error("shadow_price_check: epsilon - h must stay >= 0");
        p.epsilon = eps;
        const DROSolution mid = solve_dro(p, costs, config);
        p.epsilon = eps + h;
        const double g_hi = solve_dro(p, costs, config).g_star;
        p.epsilon = eps - h;
        const double g_lo = solve_dro(p, costs, config).g_star;
        ShadowPricePoint pt;
        pt.epsilon = eps;
        pt.fd_slope = (g_hi - g_lo) / (2.0 * h);
        pt.minus_lambda_star = -mid.lambda_star;
        pt.gap = std::abs(pt.fd_slope + mid.lambda_star);
        out.push_back(pt);
    }
    return out;
}

MetricsReport run_sweep(const NoisyDataset& dataset, const NoiseKernel& kernel,
                        const SupportGrid& grid, const std::vector<double>& epsilons,
                        const std::vector<double>& alphas, const std::vector<Mode>& modes,
                        const SolverConfig& config) {
    if (epsilons.empty() || alphas.empty() || modes.empty())
        throw invalid_input_error("run_sweep: empty sweep axis");
    for (double e : epsilons)
        if (!(e >= 0.0)) throw invalid_input_error("run_sweep: epsilon must be >= 0");
    for (double a : alphas)
        if (!(a >= 0.0)) throw invalid_input_error("run_sweep: alpha must be >= 0");

    MetricsReport report;

    // Shared POA baselines: SAA value per alpha.
    std::set<double> alpha_set(alphas.begin(), alphas.end());
    alpha_set.insert(0.0); // POF baselines need the alpha = 0 column
    for (double a : alpha_set) {
        FairnessUtility u{a, dataset.dim};
        report.system_by_alpha[a] = solve_saa(dataset, u, config).value;
    }
    report.system = report.system_by_alpha.at(0.0);

    // Cell list in canonical (epsilon, alpha, mode) order, alpha = 0 cells
    // included for the per-mode POF baselines even when not requested.
    std::vector<double> cell_alphas(alpha_set.begin(), alpha_set.end());
    std::vector<Mode> cell_modes = modes;
    std::sort(cell_modes.begin(), cell_modes.end());
    cell_modes.erase(std::unique(cell_modes.begin(), cell_modes.end()), cell_modes.end());
    std::vector<double> cell_eps = epsilons;
    std::sort(cell_eps.begin(), cell_eps.end());
    cell_eps.erase(std::unique(cell_eps.begin(), cell_eps.end()), cell_eps.end());

    struct Cell {
        double epsilon, alpha;
        Mode mode;
    };
    std::vector<Cell> cells;
    for (double e : cell_eps)
        for (double a : cell_alphas)
            for (Mode m : cell_modes) cells.push_back({e, a, m});

    // Cost matrices depend only on the mode, not on (epsilon, alpha).
    std::map<int, CostMatrix> costs_by_mode;
    for (Mode m : cell_modes) {
        DROProblem p{dataset, kernel, grid, FairnessUtility{0.0, dataset.dim}, 0.0, m};
        costs_by_mode[static_cast<int>(m)] = build_cost_matrix(p);
    }

    std::vector<DROSolution> solutions(cells.size());
    const std::int64_t n_cells = static_cast<std::int64_t>(cells.size());
    std::exception_ptr first_error;
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n_cells; ++i) {
        try {
            const Cell& cell = cells[static_cast<std::size_t>(i)];
            DROProblem p{dataset,      kernel, grid,
                         FairnessUtility{cell.alpha, dataset.dim},
                         cell.epsilon, cell.mode};
            solutions[static_cast<std::size_t>(i)] =
                solve_dro(p, costs_by_mode.at(static_cast<int>(cell.mode)), config);
        } catch (...) {
#pragma omp critical
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);

    for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i].alpha == 0.0)
            report.system_f[{static_cast<int>(cells[i].mode), cells[i].epsilon}] =
                solutions[i].g_star;

    const std::set<double> requested_alphas(alphas.begin(), alphas.end());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const Cell& cell = cells[i];
        if (!requested_alphas.count(cell.alpha)) continue;
        const DROSolution& sol = solutions[i];
        SweepRow row;
        row.epsilon = cell.epsilon;
        row.alpha = cell.alpha;
        row.mode = cell.mode;
        row.kernel = noise_family_name(cell.mode == Mode::Direct ? NoiseFamily::Dirac
                                                                 : kernel.family);
        row.g_star = sol.g_star;
        row.lambda_star = sol.lambda_star;
        const double system_a = report.system_by_alpha.at(cell.alpha);
        row.poa = system_a > 0.0 ? price_of_ambiguity(system_a, sol.g_star) : kNaN;
        const double system_f =
            report.system_f.at({static_cast<int>(cell.mode), cell.epsilon});
        row.pof = system_f > 0.0 ? price_of_fairness(system_f, sol.g_star) : kNaN;
        row.dispersion = dispersion(sol.w_star);
        row.converged = sol.converged;
        row.lambda_at_cap = sol.lambda_at_cap;
        row.w = sol.w_star.w;
        report.rows.push_back(std::move(row));
    }
    return report;
}

} // namespace noisydro
