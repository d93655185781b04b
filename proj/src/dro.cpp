#include "noisydro/dro.hpp"
#include "noisydro/compute.hpp"
#include "noisydro/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace noisydro {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Below this element count the OpenMP variants are not worth the fork.
constexpr std::size_t kParallelWork = 1u << 15;
} // namespace

const char* mode_name(Mode m) {
    return m == Mode::Direct ? "direct" : "noisy";
}

void DROProblem::validate() const {
    dataset.validate();
    kernel.validate();
    grid.validate();
    utility.validate();
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
        throw invalid_input_error("DROProblem: epsilon must be finite and >= 0");
    if (grid.dim != dataset.dim || kernel.dim != dataset.dim || utility.n != dataset.dim)
        throw invalid_input_error("DROProblem: dimension mismatch across components");
    for (const auto& p : grid.points)
        for (double v : p)
            if (!(v > -1.0))
                throw invalid_input_error("DROProblem: grid coordinate <= -1 leaves the "
                                          "utility domain");
}

void CostMatrix::validate() const {
    if (c.size() != rows * cols) throw invalid_input_error("CostMatrix: shape mismatch");
    for (double v : c)
        if (!(v >= 0.0)) throw invalid_input_error("CostMatrix: negative entry");
}

void SolverConfig::validate() const {
    if (max_iters < 1) throw invalid_input_error("SolverConfig: max_iters must be >= 1");
    if (!(step_c0 > 0.0)) throw invalid_input_error("SolverConfig: step_c0 must be > 0");
    if (!(stall_tol > 0.0)) throw invalid_input_error("SolverConfig: stall_tol must be > 0");
    if (stall_window < 1) throw invalid_input_error("SolverConfig: stall_window must be >= 1");
    if (lambda_max < 0.0) throw invalid_input_error("SolverConfig: lambda_max must be >= 0");
    if (!(polish_gap_tol > 0.0))
        throw invalid_input_error("SolverConfig: polish_gap_tol must be > 0");
}

double lambda_cap(const SupportGrid& grid, const FairnessUtility& utility) {
    // Lipschitz bound of the aggregate utility over the grid, in both
    // arguments: |dU/dw_i| <= |x_i| and |dU/dx_i| <= w_i (1 + w_i x_i)^-alpha.
    double bound = 1.0;
    for (const auto& p : grid.points) {
        for (double v : p) {
            bound = std::max(bound, std::abs(v));
            if (v < 0.0) bound = std::max(bound, std::pow(1.0 + v, -utility.alpha));
        }
    }
    return bound + 1.0;
}

CostMatrix build_cost_matrix(const DROProblem& problem) {
    problem.validate();
    const NoiseKernel kernel =
        problem.mode == Mode::Direct ? make_dirac(problem.dataset.dim) : problem.kernel;
    CostMatrix cm;
    cm.rows = problem.dataset.size();
    cm.cols = problem.grid.size();
    cm.c.resize(cm.rows * cm.cols);
    const std::size_t work = cm.rows * cm.cols * kernel.size() * problem.dataset.dim;
    if (work >= kParallelWork)
        compute::cost_matrix_parallel(kernel, problem.dataset, problem.grid, cm.c);
    else
        compute::cost_matrix_serial(kernel, problem.dataset, problem.grid, cm.c);
    cm.validate();
    return cm;
}

namespace {

// Reusable buffers for the many dual evaluations inside a solve.
class DualEvaluator {
public:
    DualEvaluator(const DROProblem& problem, const CostMatrix& costs)
        : problem_(problem),
          costs_(costs),
          u_(problem.grid.size()),
          a_(problem.dataset.size()),
          argmin_(problem.dataset.size()),
          grad_buf_(problem.utility.n) {}

    double eval(std::span<const double> w, double lambda) {
        const std::size_t n_grid = problem_.grid.size();
        const std::size_t n_samples = problem_.dataset.size();
        if (n_grid * problem_.utility.n >= kParallelWork)
            compute::utilities_on_grid_parallel(problem_.utility, w, problem_.grid, u_);
        else
            compute::utilities_on_grid_serial(problem_.utility, w, problem_.grid, u_);
        if (n_samples * n_grid >= kParallelWork)
            compute::epigraph_min_parallel(u_, costs_.c, n_samples, n_grid, lambda, a_,
                                           argmin_);
        else
            compute::epigraph_min_serial(u_, costs_.c, n_samples, n_grid, lambda, a_,
                                         argmin_);
        double mean = 0.0;
        for (double aj : a_) mean += aj;
        mean /= static_cast<double>(n_samples);
        return -lambda * problem_.epsilon + mean;
    }

    // Envelope supergradient at the active minimizers of the last eval().
    void supergradient(std::span<const double> w, std::span<double> gw, double& glambda) {
        const std::size_t n = problem_.utility.n;
        const std::size_t n_samples = problem_.dataset.size();
        std::fill(gw.begin(), gw.end(), 0.0);
        double mean_cost = 0.0;
        for (std::size_t j = 0; j < n_samples; ++j) {
            const std::size_t k = static_cast<std::size_t>(argmin_[j]);
            utility_gradient(problem_.utility, w,
                             std::span<const double>(problem_.grid.points[k]), grad_buf_);
            for (std::size_t i = 0; i < n; ++i) gw[i] += grad_buf_[i];
            mean_cost += costs_.at(j, k);
        }
        const double inv_n = 1.0 / static_cast<double>(n_samples);
        for (std::size_t i = 0; i < n; ++i) gw[i] *= inv_n;
        glambda = -problem_.epsilon + mean_cost * inv_n;
    }

    const std::vector<double>& a() const { return a_; }
    const std::vector<std::int32_t>& argmin() const { return argmin_; }

private:
    const DROProblem& problem_;
    const CostMatrix& costs_;
    std::vector<double> u_, a_;
    std::vector<std::int32_t> argmin_;
    std::vector<double> grad_buf_;
};

// Golden-section maximization of a concave function on [lo, hi].
template <class F>
std::pair<double, double> golden_max(F&& f, double lo, double hi, int iters = 220,
                                     double xtol = 1e-13) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters && (b - a) > xtol; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    return f1 >= f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

struct EllipsoidResult {
    std::vector<double> best_v;
    double best_value = -kInf;
    double gap = kInf;
    int iterations = 0;
    bool certified = false;
};

// Central-cut ellipsoid method for maximizing a concave function over a
// convex set given by separating cuts. The running upper bound
// min_t [f(c_t) + sqrt(g' Q g)] certifies the remaining optimality gap,
// since every cut keeps the maximizer inside the ellipsoid.
EllipsoidResult ellipsoid_maximize(
    std::size_t dim, std::vector<double> center, double radius, int max_iters, double gap_tol,
    const std::function<bool(std::span<const double>, std::span<double>)>& feasibility,
    const std::function<double(std::span<const double>, std::span<double>)>& eval) {
    const std::size_t d = dim;
    std::vector<double> q(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) q[i * d + i] = radius * radius;
    std::vector<double> c = std::move(center);
    std::vector<double> cut(d), grad(d), qa(d);

    EllipsoidResult out;
    double ub = kInf;
    const double dd = static_cast<double>(d);
    const double shrink = dd * dd / (dd * dd - 1.0);

    for (int it = 0; it < max_iters; ++it) {
        out.iterations = it + 1;
        bool finite_center = true;
        for (double v : c) finite_center = finite_center && std::isfinite(v);
        if (!finite_center) break; // numerically exhausted
        if (feasibility(c, cut)) {
            const double val = eval(c, grad);
            if (val > out.best_value) {
                out.best_value = val;
                out.best_v = c;
            }
            double gqg = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < d; ++j) acc += q[i * d + j] * grad[j];
                gqg += grad[i] * acc;
            }
            ub = std::min(ub, val + std::sqrt(std::max(0.0, gqg)));
            out.gap = ub - out.best_value;
            if (out.gap <= gap_tol) {
                out.certified = true;
                break;
            }
            for (std::size_t i = 0; i < d; ++i) cut[i] = -grad[i];
        }

        double aqa = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < d; ++j) acc += q[i * d + j] * cut[j];
            qa[i] = acc;
        }
        for (std::size_t i = 0; i < d; ++i) aqa += cut[i] * qa[i];
        if (!(aqa > 1e-300)) break; // ellipsoid collapsed
        const double s = std::sqrt(aqa);
        for (std::size_t i = 0; i < d; ++i) {
            const double bi = qa[i] / s;
            c[i] -= bi / (dd + 1.0);
            qa[i] = bi;
        }
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                q[i * d + j] = shrink * (q[i * d + j] - 2.0 / (dd + 1.0) * qa[i] * qa[j]);
        // keep Q symmetric against drift
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) {
                const double avg = 0.5 * (q[i * d + j] + q[j * d + i]);
                q[i * d + j] = avg;
                q[j * d + i] = avg;
            }
    }
    if (out.best_v.empty()) out.best_v = c;
    return out;
}

} // namespace

DualEval dual_objective(const DROProblem& problem, const CostMatrix& costs,
                        std::span<const double> w, double lambda) {
    if (w.size() != problem.utility.n)
        throw invalid_input_error("dual_objective: w dimension mismatch");
    if (!(lambda >= 0.0)) throw invalid_input_error("dual_objective: lambda must be >= 0");
    if (costs.rows != problem.dataset.size() || costs.cols != problem.grid.size())
        throw invalid_input_error("dual_objective: cost matrix shape mismatch");
    DualEvaluator ev(problem, costs);
    DualEval out;
    out.value = ev.eval(w, lambda);
    out.a = ev.a();
    out.argmin = ev.argmin();
    return out;
}

DROSolution solve_dro(const DROProblem& problem, const SolverConfig& config) {
    return solve_dro(problem, build_cost_matrix(problem), config);
}

DROSolution solve_dro(const DROProblem& problem, const CostMatrix& costs,
                      const SolverConfig& config) {
    problem.validate();
    config.validate();
    if (costs.rows != problem.dataset.size() || costs.cols != problem.grid.size())
        throw invalid_input_error("solve_dro: cost matrix shape mismatch");

    const std::size_t n = problem.utility.n;
    const double cap =
        config.lambda_max > 0.0 ? config.lambda_max : lambda_cap(problem.grid, problem.utility);
    DualEvaluator ev(problem, costs);

    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    double lambda = std::min(1.0, 0.5 * cap);
    std::vector<double> best_w = w;
    double best_lambda = lambda;
    double best_value = -kInf;

    // Phase 1: projected supergradient ascent, step c0/sqrt(t), best iterate
    // kept, stop on a stall of the best value.
    std::vector<double> gw(n);
    double glambda = 0.0;
    int iterations = 0;
    int last_improve = 0;
    bool stalled = false;
    for (int t = 1; t <= config.max_iters; ++t) {
        iterations = t;
        const double val = ev.eval(w, lambda);
        if (val > best_value + config.stall_tol) last_improve = t;
        if (val > best_value) {
            best_value = val;
            best_w = w;
            best_lambda = lambda;
        }
        if (t - last_improve >= config.stall_window) {
            stalled = true;
            break;
        }
        ev.supergradient(w, gw, glambda);
        const double step = config.step_c0 / std::sqrt(static_cast<double>(t));
        for (std::size_t i = 0; i < n; ++i) w[i] += step * gw[i];
        w = project_simplex(w);
        lambda = std::clamp(lambda + step * glambda, 0.0, cap);
    }

    // Phase 2: cutting-scheme polish. The 1/sqrt(t) rule alone cannot reach
    // the tolerances the downstream checks run at.
    bool certified = false;
    if (config.polish) {
        if (n == 1) {
            const std::vector<double> w1{1.0};
            auto [lam, val] = golden_max(
                [&](double l) { return ev.eval(std::span<const double>(w1), l); }, 0.0, cap);
            iterations += 220;
            if (val > best_value) {
                best_value = val;
                best_w = w1;
                best_lambda = lam;
            }
            certified = true;
        } else {
            const std::size_t d = n; // n-1 free simplex coords + lambda
            const int budget = config.polish_iters > 0
                                   ? config.polish_iters
                                   : static_cast<int>(50 * d * (d + 1) + 200);
            std::vector<double> center(d, 1.0 / static_cast<double>(n));
            center[d - 1] = 0.5 * cap;
            const double radius = std::sqrt(2.0 + 0.25 * cap * cap) + 1.0;

            auto feasibility = [&](std::span<const double> v, std::span<double> cut) {
                std::fill(cut.begin(), cut.end(), 0.0);
                double sum = 0.0;
                for (std::size_t i = 0; i + 1 < d; ++i) {
                    if (v[i] < -1e-11) {
                        cut[i] = -1.0;
                        return false;
                    }
                    sum += v[i];
                }
                if (sum > 1.0 + 1e-11) {
                    for (std::size_t i = 0; i + 1 < d; ++i) cut[i] = 1.0;
                    return false;
                }
                if (v[d - 1] < -1e-11) {
                    cut[d - 1] = -1.0;
                    return false;
                }
                if (v[d - 1] > cap + 1e-11) {
                    cut[d - 1] = 1.0;
                    return false;
                }
                return true;
            };
            std::vector<double> wv(n), gfull(n);
            auto eval = [&](std::span<const double> v, std::span<double> grad) {
                double sum = 0.0;
                for (std::size_t i = 0; i + 1 < d; ++i) {
                    wv[i] = v[i];
                    sum += v[i];
                }
                wv[n - 1] = 1.0 - sum;
                const double lam = std::clamp(v[d - 1], 0.0, cap);
                const double val = ev.eval(std::span<const double>(wv), lam);
                double gl = 0.0;
                ev.supergradient(std::span<const double>(wv), gfull, gl);
                for (std::size_t i = 0; i + 1 < d; ++i) grad[i] = gfull[i] - gfull[n - 1];
                grad[d - 1] = gl;
                if (val > best_value) {
                    best_value = val;
                    best_w = wv;
                    best_lambda = lam;
                }
                return val;
            };
            const auto res = ellipsoid_maximize(d, center, radius, budget,
                                                config.polish_gap_tol, feasibility, eval);
            iterations += res.iterations;
            certified = res.certified || res.gap <= 1e-7;
        }
    }

    // Tiny feasibility dust from the polish phase is removed before the
    // final consistent recompute at the returned point.
    best_w = project_simplex(best_w);
    best_lambda = std::clamp(best_lambda, 0.0, cap);

    DROSolution sol;
    const DualEval fin = dual_objective(problem, costs, best_w, best_lambda);
    sol.w_star = make_allocation(best_w);
    sol.lambda_star = best_lambda;
    sol.g_star = fin.value;
    sol.a = fin.a;
    sol.argmin_x = fin.argmin;
    sol.iterations = iterations;
    sol.converged = stalled || certified;
    sol.lambda_cap = cap;
    sol.lambda_at_cap = best_lambda >= cap - 1e-9;

    DualEvaluator fev(problem, costs);
    fev.eval(best_w, best_lambda);
    double gl = 0.0;
    fev.supergradient(best_w, gw, gl);
    double norm2 = gl * gl;
    for (double v : gw) norm2 += v * v;
    sol.supergradient_norm = std::sqrt(norm2);
    return sol;
}

namespace {

// Weighted empirical utility and gradient shared by the SAA solvers.
struct EmpiricalObjective {
    const std::vector<std::vector<double>>* points;
    const std::vector<double>* weights;
    const FairnessUtility* utility;

    double value(std::span<const double> w) const {
        double total = 0.0;
        for (std::size_t j = 0; j < points->size(); ++j)
            total += (*weights)[j] *
                     aggregate_utility(*utility, w, std::span<const double>((*points)[j]));
        return total;
    }

    void gradient(std::span<const double> w, std::span<double> out,
                  std::span<double> buf) const {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t j = 0; j < points->size(); ++j) {
            utility_gradient(*utility, w, std::span<const double>((*points)[j]), buf);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += (*weights)[j] * buf[i];
        }
    }
};

} // namespace

SAAResult solve_weighted_saa(const std::vector<std::vector<double>>& points,
                             const std::vector<double>& weights,
                             const FairnessUtility& utility, const SolverConfig& config) {
    utility.validate();
    config.validate();
    if (points.empty() || points.size() != weights.size())
        throw invalid_input_error("solve_weighted_saa: points/weights mismatch");
    double wsum = 0.0;
    for (double v : weights) {
        if (!(v >= 0.0)) throw invalid_input_error("solve_weighted_saa: negative weight");
        wsum += v;
    }
    if (!(wsum > 0.0)) throw invalid_input_error("solve_weighted_saa: zero total weight");
    std::vector<double> wnorm = weights;
    for (auto& v : wnorm) v /= wsum;
    for (const auto& p : points)
        if (p.size() != utility.n)
            throw invalid_input_error("solve_weighted_saa: point dimension mismatch");

    const EmpiricalObjective obj{&points, &wnorm, &utility};
    const std::size_t n = utility.n;
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    std::vector<double> grad(n), buf(n), trial(n);
    double fw = obj.value(w);
    int iterations = 0;

    // Projected gradient ascent with a backtracking step. The sufficient
    // increase margin keeps float dust from ratcheting the step size on
    // directions where the objective is constant.
    double step = 1.0;
    for (int t = 0; t < std::min(config.max_iters, 2000); ++t) {
        ++iterations;
        obj.gradient(w, grad, buf);
        bool improved = false;
        const double margin = 1e-14 * std::max(1.0, std::abs(fw));
        for (double s = std::min(step * 4.0, 1e8); s > 1e-15; s *= 0.5) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = w[i] + s * grad[i];
            trial = project_simplex(trial);
            const double ft = obj.value(trial);
            if (ft > fw + margin) {
                w = trial;
                fw = ft;
                step = s;
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }

    if (config.polish && n >= 2) {
        if (n == 2) {
            auto [w1, val] = golden_max(
                [&](double x) {
                    const double pair[2] = {x, 1.0 - x};
                    return obj.value(std::span<const double>(pair, 2));
                },
                0.0, 1.0);
            iterations += 220;
            if (val > fw) {
                fw = val;
                w = {w1, 1.0 - w1};
            }
        } else {
            const std::size_t d = n - 1;
            std::vector<double> center(d, 1.0 / static_cast<double>(n));
            std::vector<double> wv(n), gfull(n), gbuf(n);
            auto feasibility = [&](std::span<const double> v, std::span<double> cut) {
                std::fill(cut.begin(), cut.end(), 0.0);
                double sum = 0.0;
                for (std::size_t i = 0; i < d; ++i) {
                    if (v[i] < -1e-11) {
                        cut[i] = -1.0;
                        return false;
                    }
                    sum += v[i];
                }
                if (sum > 1.0 + 1e-11) {
                    std::fill(cut.begin(), cut.end(), 1.0);
                    return false;
                }
                return true;
            };
            double best = fw;
            std::vector<double> best_w = w;
            auto eval = [&](std::span<const double> v, std::span<double> g) {
                double sum = 0.0;
                for (std::size_t i = 0; i < d; ++i) {
                    wv[i] = v[i];
                    sum += v[i];
                }
                wv[n - 1] = 1.0 - sum;
                const double val = obj.value(std::span<const double>(wv));
                obj.gradient(std::span<const double>(wv), gfull, gbuf);
                for (std::size_t i = 0; i < d; ++i) g[i] = gfull[i] - gfull[n - 1];
                if (val > best) {
                    best = val;
                    best_w = wv;
                }
                return val;
            };
            const int budget = static_cast<int>(50 * d * (d + 1) + 200);
            const auto res = ellipsoid_maximize(d, center, std::sqrt(2.0) + 1.0, budget,
                                                config.polish_gap_tol, feasibility, eval);
            iterations += res.iterations;
            if (best > fw) {
                fw = best;
                w = best_w;
            }
        }
    }

    SAAResult out;
    out.w = make_allocation(project_simplex(w));
    out.value = obj.value(std::span<const double>(out.w.w));
    out.iterations = iterations;
    return out;
}

SAAResult solve_saa(const NoisyDataset& dataset, const FairnessUtility& utility,
                    const SolverConfig& config) {
    dataset.validate();
    const std::vector<double> weights(dataset.size(), 1.0);
    return solve_weighted_saa(dataset.samples, weights, utility, config);
}

std::vector<double> project_simplex(std::span<const double> v) {
    if (v.empty()) throw invalid_input_error("project_simplex: empty vector");
    for (double x : v)
        if (!std::isfinite(x)) throw invalid_input_error("project_simplex: non-finite input");
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumsum = 0.0, theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cumsum += u[j];
        const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) theta = t;
    }
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - theta, 0.0);
    return out;
}

double oracle_grid_solve(const DROProblem& problem, int w_grid_res,
                         const std::vector<double>& lambda_grid) {
    problem.validate();
    const std::size_t n = problem.utility.n;
    if (n > 3 || problem.dataset.size() > 10 || problem.grid.size() > 10)
        throw size_guard_error("oracle_grid_solve: instance exceeds desk-scale limits");
    if (w_grid_res < 1) throw invalid_input_error("oracle_grid_solve: resolution must be >= 1");
    if (lambda_grid.empty())
        throw invalid_input_error("oracle_grid_solve: empty lambda grid");
    for (double l : lambda_grid)
        if (!(l >= 0.0)) throw invalid_input_error("oracle_grid_solve: lambda must be >= 0");

    const CostMatrix costs = build_cost_matrix(problem);
    const std::size_t n_grid = problem.grid.size();
    const std::size_t n_samples = problem.dataset.size();

    std::vector<double> u(n_grid);
    std::vector<double> w(n);
    double best = -kInf;

    // All weak compositions of w_grid_res into n parts.
    std::vector<int> parts(n, 0);
    std::function<void(std::size_t, int)> visit = [&](std::size_t i, int remaining) {
        if (i + 1 == n) {
            parts[i] = remaining;
            for (std::size_t k = 0; k < n; ++k)
                w[k] = static_cast<double>(parts[k]) / static_cast<double>(w_grid_res);
            for (std::size_t k = 0; k < n_grid; ++k)
                u[k] = aggregate_utility(problem.utility, std::span<const double>(w),
                                         std::span<const double>(problem.grid.points[k]));
            for (const double lambda : lambda_grid) {
                double mean = 0.0;
                for (std::size_t j = 0; j < n_samples; ++j) {
                    double m = kInf;
                    for (std::size_t k = 0; k < n_grid; ++k)
                        m = std::min(m, u[k] + lambda * costs.at(j, k));
                    mean += m;
                }
                mean /= static_cast<double>(n_samples);
                best = std::max(best, -lambda * problem.epsilon + mean);
            }
            return;
        }
        for (int v2 = 0; v2 <= remaining; ++v2) {
            parts[i] = v2;
            visit(i + 1, remaining - v2);
        }
    };
    visit(0, w_grid_res);
    return best;
}

} // namespace noisydro
