#include "noisydro/stats.hpp"
#include "noisydro/errors.hpp"

#include <algorithm>
#include <exception>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>

namespace noisydro {

void EpsilonSchedule::validate() const {
    if (!(c1 > 0.0)) throw invalid_input_error("EpsilonSchedule: c1 must be > 0");
    if (!(c2 > 0.0)) throw invalid_input_error("EpsilonSchedule: c2 must be > 0");
    if (!(a > 1.0)) throw invalid_input_error("EpsilonSchedule: a must be > 1");
    if (n == 0) throw invalid_input_error("EpsilonSchedule: n must be >= 1");
    if (n == 2)
        std::cerr << "warning: EpsilonSchedule with n = 2 is outside the hypothesis of "
                     "the concentration bound (formula still evaluated)\n";
}

double epsilon_n(const EpsilonSchedule& schedule, double beta, std::int64_t N) {
    schedule.validate();
    if (!(beta > 0.0 && beta < 1.0))
        throw invalid_input_error("epsilon_n: beta must lie in (0, 1)");
    if (N < 1) throw invalid_input_error("epsilon_n: N must be >= 1");
    const double num = std::log(schedule.c1 / beta);
    if (num <= 0.0) return 0.0; // confidence already met at radius zero
    const double ratio = num / (schedule.c2 * static_cast<double>(N));
    if (static_cast<double>(N) >= num / schedule.c2)
        return std::pow(ratio, 1.0 / std::max<double>(static_cast<double>(schedule.n), 2.0));
    return std::pow(ratio, 1.0 / schedule.a);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Exact min-cost perfect matching (Jonker-Volgenant style shortest
// augmenting paths with potentials), O(m^3).
double assignment_min_cost(const std::vector<double>& cost, std::size_t m) {
    std::vector<double> u(m + 1, 0.0), v(m + 1, 0.0), minv(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= m; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    double total = 0.0;
    for (std::size_t j = 1; j <= m; ++j) total += cost[(p[j] - 1) * m + (j - 1)];
    return total;
}

double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return d;
}

} // namespace

double wasserstein1_discrete_1d(std::span<const double> xs, std::span<const double> px,
                                std::span<const double> ys, std::span<const double> py) {
    if (xs.empty() || ys.empty() || xs.size() != px.size() || ys.size() != py.size())
        throw invalid_input_error("wasserstein1_discrete_1d: shape mismatch");
    auto order = [](std::span<const double> pts, std::span<const double> mass) {
        std::vector<std::pair<double, double>> atoms(pts.size());
        double total = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            atoms[i] = {pts[i], mass[i]};
            total += mass[i];
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw invalid_input_error("wasserstein1_discrete_1d: masses must sum to 1");
        std::sort(atoms.begin(), atoms.end());
        return atoms;
    };
    const auto A = order(xs, px);
    const auto B = order(ys, py);

    // Integral of |F_A - F_B| over the merged breakpoints.
    double total = 0.0, cdf_a = 0.0, cdf_b = 0.0;
    double last = 0.0;
    bool started = false;
    std::size_t i = 0, j = 0;
    while (i < A.size() || j < B.size()) {
        const double x = (j >= B.size() || (i < A.size() && A[i].first <= B[j].first))
                             ? A[i].first
                             : B[j].first;
        if (started) total += std::abs(cdf_a - cdf_b) * (x - last);
        while (i < A.size() && A[i].first == x) cdf_a += A[i++].second;
        while (j < B.size() && B[j].first == x) cdf_b += B[j++].second;
        last = x;
        started = true;
    }
    return total;
}

double wasserstein1_empirical(const std::vector<std::vector<double>>& P,
                              const std::vector<std::vector<double>>& Q) {
    if (P.empty() || Q.empty())
        throw invalid_input_error("wasserstein1_empirical: empty sample set");
    const std::size_t dim = P.front().size();
    if (dim == 0) throw invalid_input_error("wasserstein1_empirical: zero-dimensional points");
    for (const auto& p : P)
        if (p.size() != dim)
            throw invalid_input_error("wasserstein1_empirical: inconsistent dimensions");
    for (const auto& q : Q)
        if (q.size() != dim)
            throw invalid_input_error("wasserstein1_empirical: inconsistent dimensions");

    if (dim == 1) {
        std::vector<double> xs(P.size()), ys(Q.size());
        for (std::size_t i = 0; i < P.size(); ++i) xs[i] = P[i][0];
        for (std::size_t i = 0; i < Q.size(); ++i) ys[i] = Q[i][0];
        const std::vector<double> px(xs.size(), 1.0 / static_cast<double>(xs.size()));
        const std::vector<double> py(ys.size(), 1.0 / static_cast<double>(ys.size()));
        return wasserstein1_discrete_1d(xs, px, ys, py);
    }

    if (P.size() != Q.size())
        throw unsupported_shape_error(
            "wasserstein1_empirical: unequal sizes need 1-D input");
    const std::size_t m = P.size();
    if (m > 200) throw size_guard_error("wasserstein1_empirical: assignment limited to 200");
    std::vector<double> cost(m * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) cost[i * m + j] = l1_distance(P[i], Q[j]);
    return assignment_min_cost(cost, m) / static_cast<double>(m);
}

void SyntheticWorld::validate() const {
    grid.validate();
    kernel.validate();
    utility.validate();
    if (pmf.size() != grid.size())
        throw invalid_input_error("SyntheticWorld: pmf size must match grid");
    double total = 0.0;
    for (double p : pmf) {
        if (!(p >= 0.0)) throw invalid_input_error("SyntheticWorld: negative pmf entry");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw invalid_input_error("SyntheticWorld: pmf must sum to 1");
    if (kernel.dim != grid.dim || utility.n != grid.dim)
        throw invalid_input_error("SyntheticWorld: dimension mismatch");
}

double g_star_so(const SyntheticWorld& world, const SolverConfig& config) {
    world.validate();
    return solve_weighted_saa(world.grid.points, world.pmf, world.utility, config).value;
}

NoisyDataset sample_noisy_dataset(const SyntheticWorld& world, int N, Rng& rng) {
    world.validate();
    if (N < 1) throw invalid_input_error("sample_noisy_dataset: N must be >= 1");
    NoisyDataset ds;
    ds.dim = world.grid.dim;
    ds.provenance = "synthetic";
    ds.samples.reserve(static_cast<std::size_t>(N));
    for (int s = 0; s < N; ++s) {
        const double u = rng.next_u01();
        double cum = 0.0;
        std::size_t idx = world.pmf.size() - 1;
        for (std::size_t k = 0; k < world.pmf.size(); ++k) {
            cum += world.pmf[k];
            if (u < cum) {
                idx = k;
                break;
            }
        }
        std::vector<double> x = world.grid.points[idx];
        const std::vector<double> e = sample_noise(world.kernel, rng);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += e[i];
        ds.samples.push_back(std::move(x));
    }
    ds.validate();
    return ds;
}

namespace {

// Exact atoms of the noisy marginal (latent pmf convolved with the kernel),
// 1-D worlds only.
std::pair<std::vector<double>, std::vector<double>>
noisy_marginal_1d(const SyntheticWorld& world) {
    std::map<double, double> atoms;
    for (std::size_t k = 0; k < world.grid.size(); ++k)
        for (std::size_t e = 0; e < world.kernel.size(); ++e)
            atoms[world.grid.points[k][0] + world.kernel.offsets[e][0]] +=
                world.pmf[k] * world.kernel.probs[e];
    std::vector<double> xs, px;
    xs.reserve(atoms.size());
    px.reserve(atoms.size());
    for (const auto& [x, p] : atoms) {
        xs.push_back(x);
        px.push_back(p);
    }
    return {std::move(xs), std::move(px)};
}

} // namespace

std::vector<double> coverage_distances(const SyntheticWorld& world, int N, int trials,
                                       std::uint64_t stream_index, int ref_factor) {
    world.validate();
    if (world.grid.dim != 1)
        throw unsupported_shape_error(
            "coverage_distances: noisy-marginal transport needs a 1-D world");
    if (N < 1 || trials < 1 || ref_factor < 0)
        throw invalid_input_error("coverage_distances: bad sizes");

    const auto [xs, px] = noisy_marginal_1d(world);
    std::vector<double> distances(static_cast<std::size_t>(trials), 0.0);
    const std::int64_t n_trials = trials;
    std::exception_ptr first_error;
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t t = 0; t < n_trials; ++t) {
        try {
            Rng rng = Rng::stream(world.seed,
                                  stream_index * static_cast<std::uint64_t>(trials) +
                                      static_cast<std::uint64_t>(t));
            const NoisyDataset ds = sample_noisy_dataset(world, N, rng);
            std::vector<double> ys(ds.size());
            for (std::size_t j = 0; j < ds.size(); ++j) ys[j] = ds.samples[j][0];
            const std::vector<double> py(ys.size(), 1.0 / static_cast<double>(ys.size()));
            double dist;
            if (ref_factor == 0) {
                dist = wasserstein1_discrete_1d(xs, px, ys, py);
            } else {
                // stand-in for marginals without a tractable atom list
                Rng ref_rng = Rng::stream(~world.seed,
                                          stream_index * static_cast<std::uint64_t>(trials) +
                                              static_cast<std::uint64_t>(t));
                const NoisyDataset ref =
                    sample_noisy_dataset(world, ref_factor * N, ref_rng);
                std::vector<double> rs(ref.size());
                for (std::size_t j = 0; j < ref.size(); ++j) rs[j] = ref.samples[j][0];
                const std::vector<double> pr(rs.size(),
                                             1.0 / static_cast<double>(rs.size()));
                dist = wasserstein1_discrete_1d(rs, pr, ys, py);
            }
            distances[static_cast<std::size_t>(t)] = dist;
        } catch (...) {
#pragma omp critical
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    return distances;
}

std::vector<CoveragePoint> coverage_experiment(const SyntheticWorld& world,
                                               const EpsilonSchedule& schedule, double beta,
                                               const std::vector<int>& Ns, int trials) {
    if (trials < 100)
        throw invalid_input_error("coverage_experiment: needs at least 100 trials");
    std::vector<CoveragePoint> out;
    out.reserve(Ns.size());
    for (std::size_t iN = 0; iN < Ns.size(); ++iN) {
        const int N = Ns[iN];
        const double eps = epsilon_n(schedule, beta, N);
        const auto distances = coverage_distances(world, N, trials, iN);
        int inside = 0;
        for (double d : distances)
            if (d <= eps) ++inside;
        out.push_back({N, eps, static_cast<double>(inside) / static_cast<double>(trials)});
    }
    return out;
}

std::vector<ConsistencyPoint> consistency_experiment(const SyntheticWorld& world,
                                                     const EpsilonSchedule& schedule,
                                                     double beta0,
                                                     const std::vector<int>& Ns,
                                                     const SolverConfig& config) {
    world.validate();
    if (!(beta0 > 0.0 && beta0 < 1.0))
        throw invalid_input_error("consistency_experiment: beta0 must lie in (0, 1)");
    for (std::size_t i = 1; i < Ns.size(); ++i)
        if (Ns[i] <= Ns[i - 1])
            throw invalid_input_error("consistency_experiment: Ns must be increasing");

    const double g_so = g_star_so(world, config);
    std::vector<ConsistencyPoint> out(Ns.size());
    const std::int64_t n_points = static_cast<std::int64_t>(Ns.size());
    std::exception_ptr first_error;
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n_points; ++i) {
        try {
            const int N = Ns[static_cast<std::size_t>(i)];
            // beta_N = beta0 / N^2 keeps the confidence sequence summable.
            const double beta_n = std::min(
                0.999999, beta0 / (static_cast<double>(N) * static_cast<double>(N)));
            const double eps = epsilon_n(schedule, beta_n, N);
            Rng rng = Rng::stream(world.seed, 0x10000000ull + static_cast<std::uint64_t>(i));
            const NoisyDataset ds = sample_noisy_dataset(world, N, rng);
            const DROProblem problem{ds, world.kernel, world.grid, world.utility, eps,
                                     Mode::Noisy};
            const double g_hat = solve_dro(problem, config).g_star;
            out[static_cast<std::size_t>(i)] =
                {N, beta_n, eps, g_hat, g_so, std::abs(g_hat - g_so)};
        } catch (...) {
#pragma omp critical
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

std::vector<BiasedBoundPoint> biased_bound_experiment(const SyntheticWorld& world,
                                                      const std::vector<double>& delta_grid,
                                                      int N, double epsilon,
                                                      const SolverConfig& config) {
    world.validate();
    if (!(epsilon > 0.0))
        throw invalid_input_error("biased_bound_experiment: epsilon must be > 0");
    Rng rng = Rng::stream(world.seed, 0x20000000ull);
    const NoisyDataset ds = sample_noisy_dataset(world, N, rng);
    const NoiseKernel base = recenter(world.kernel);

    const DROProblem direct{ds, base, world.grid, world.utility, epsilon, Mode::Direct};
    const DROSolution direct_sol = solve_dro(direct, config);

    std::vector<BiasedBoundPoint> out;
    out.reserve(delta_grid.size());
    for (double delta : delta_grid) {
        if (!(delta >= 0.0))
            throw invalid_input_error("biased_bound_experiment: delta must be >= 0");
        const std::vector<double> bias(world.grid.dim,
                                       delta / static_cast<double>(world.grid.dim));
        const NoiseKernel biased = shift_kernel(base, bias);
        const DROProblem noisy{ds, biased, world.grid, world.utility, epsilon, Mode::Noisy};
        const double g_b = solve_dro(noisy, config).g_star;
        BiasedBoundPoint pt;
        pt.delta = delta;
        pt.g_noisy_biased = g_b;
        pt.g_direct = direct_sol.g_star;
        pt.lambda_direct = direct_sol.lambda_star;
        pt.bound_ok = g_b >= direct_sol.g_star - direct_sol.lambda_star * delta - 1e-6;
        out.push_back(pt);
    }
    return out;
}

double calibrate_c2(const SyntheticWorld& world, double c1, double beta, int pilot_N,
                    int trials, double a) {
    if (!(c1 > 0.0) || !(beta > 0.0 && beta < 1.0))
        throw invalid_input_error("calibrate_c2: bad c1 or beta");
    const double num = std::log(c1 / beta);
    if (!(num > 0.0))
        throw invalid_input_error("calibrate_c2: log(c1/beta) must be positive");
    auto distances = coverage_distances(world, pilot_N, trials, 0x30000000ull);
    std::sort(distances.begin(), distances.end());
    const std::size_t idx = std::min(
        distances.size() - 1,
        static_cast<std::size_t>(std::ceil((1.0 - beta) * static_cast<double>(trials))));
    const double q = distances[idx];
    if (!(q > 0.0))
        throw invalid_input_error("calibrate_c2: pilot distances are all zero");
    const double exponent =
        q <= 1.0 ? std::max<double>(static_cast<double>(world.grid.dim), 2.0) : a;
    return num / (static_cast<double>(pilot_N) * std::pow(q, exponent));
}

} // namespace noisydro
