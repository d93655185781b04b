#include "noisydro/compute.hpp"
#include "noisydro/errors.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace noisydro::compute {

bool openmp_enabled() {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

namespace {

// Contiguous copies of the point sets; the row kernels below are pure
// functions of these buffers.
struct Flat {
    std::vector<double> samples; // N x n
    std::vector<double> grid;    // K x n
    std::vector<double> offsets; // E x n
    std::vector<double> probs;   // E
    std::size_t n_samples = 0, n_grid = 0, n_offsets = 0, dim = 0;
};

Flat flatten(const NoiseKernel& kernel, const NoisyDataset& data, const SupportGrid& grid) {
    if (kernel.dim != data.dim || grid.dim != data.dim)
        throw invalid_input_error("cost matrix: dimension mismatch");
    Flat f;
    f.dim = data.dim;
    f.n_samples = data.size();
    f.n_grid = grid.size();
    f.n_offsets = kernel.size();
    f.samples.reserve(f.n_samples * f.dim);
    for (const auto& s : data.samples) f.samples.insert(f.samples.end(), s.begin(), s.end());
    f.grid.reserve(f.n_grid * f.dim);
    for (const auto& p : grid.points) f.grid.insert(f.grid.end(), p.begin(), p.end());
    f.offsets.reserve(f.n_offsets * f.dim);
    for (const auto& e : kernel.offsets) f.offsets.insert(f.offsets.end(), e.begin(), e.end());
    f.probs = kernel.probs;
    return f;
}

inline void cost_matrix_row(const Flat& f, std::size_t j, double* row) {
    const double* xj = f.samples.data() + j * f.dim;
    for (std::size_t k = 0; k < f.n_grid; ++k) {
        const double* gk = f.grid.data() + k * f.dim;
        double total = 0.0;
        for (std::size_t e = 0; e < f.n_offsets; ++e) {
            const double* off = f.offsets.data() + e * f.dim;
            double dist = 0.0;
            for (std::size_t i = 0; i < f.dim; ++i)
                dist += std::abs(gk[i] + off[i] - xj[i]);
            total += f.probs[e] * dist;
        }
        row[k] = total;
    }
}

inline void epigraph_row(const double* u, const double* crow, std::size_t n_grid,
                         double lambda, double* aj, std::int32_t* kj) {
    double best = std::numeric_limits<double>::infinity();
    std::int32_t best_k = 0;
    for (std::size_t k = 0; k < n_grid; ++k) {
        const double v = u[k] + lambda * crow[k];
        if (v < best) {
            best = v;
            best_k = static_cast<std::int32_t>(k);
        }
    }
    *aj = best;
    *kj = best_k;
}

} // namespace

void cost_matrix_serial(const NoiseKernel& kernel, const NoisyDataset& data,
                        const SupportGrid& grid, std::span<double> c) {
    const Flat f = flatten(kernel, data, grid);
    if (c.size() != f.n_samples * f.n_grid)
        throw invalid_input_error("cost matrix: output size mismatch");
    for (std::size_t j = 0; j < f.n_samples; ++j)
        cost_matrix_row(f, j, c.data() + j * f.n_grid);
}

void cost_matrix_parallel(const NoiseKernel& kernel, const NoisyDataset& data,
                          const SupportGrid& grid, std::span<double> c) {
    const Flat f = flatten(kernel, data, grid);
    if (c.size() != f.n_samples * f.n_grid)
        throw invalid_input_error("cost matrix: output size mismatch");
    const std::int64_t n = static_cast<std::int64_t>(f.n_samples);
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < n; ++j)
        cost_matrix_row(f, static_cast<std::size_t>(j), c.data() + j * f.n_grid);
}

void utilities_on_grid_serial(const FairnessUtility& utility, std::span<const double> w,
                              const SupportGrid& grid, std::span<double> u) {
    if (u.size() != grid.size())
        throw invalid_input_error("utilities_on_grid: output size mismatch");
    for (std::size_t k = 0; k < grid.size(); ++k)
        u[k] = aggregate_utility(utility, w, std::span<const double>(grid.points[k]));
}

void utilities_on_grid_parallel(const FairnessUtility& utility, std::span<const double> w,
                                const SupportGrid& grid, std::span<double> u) {
    if (u.size() != grid.size())
        throw invalid_input_error("utilities_on_grid: output size mismatch");
    const std::int64_t n = static_cast<std::int64_t>(grid.size());
    std::exception_ptr first_error;
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < n; ++k) {
        try {
            u[static_cast<std::size_t>(k)] = aggregate_utility(
                utility, w,
                std::span<const double>(grid.points[static_cast<std::size_t>(k)]));
        } catch (...) {
#pragma omp critical
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

void epigraph_min_serial(std::span<const double> u, std::span<const double> c,
                         std::size_t n_samples, std::size_t n_grid, double lambda,
                         std::span<double> a, std::span<std::int32_t> argmin) {
    if (u.size() != n_grid || c.size() != n_samples * n_grid || a.size() != n_samples ||
        argmin.size() != n_samples)
        throw invalid_input_error("epigraph_min: size mismatch");
    for (std::size_t j = 0; j < n_samples; ++j)
        epigraph_row(u.data(), c.data() + j * n_grid, n_grid, lambda, &a[j], &argmin[j]);
}

void epigraph_min_parallel(std::span<const double> u, std::span<const double> c,
                           std::size_t n_samples, std::size_t n_grid, double lambda,
                           std::span<double> a, std::span<std::int32_t> argmin) {
    if (u.size() != n_grid || c.size() != n_samples * n_grid || a.size() != n_samples ||
        argmin.size() != n_samples)
        throw invalid_input_error("epigraph_min: size mismatch");
    const std::int64_t n = static_cast<std::int64_t>(n_samples);
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < n; ++j)
        epigraph_row(u.data(), c.data() + j * n_grid, n_grid, lambda,
                     &a[static_cast<std::size_t>(j)], &argmin[static_cast<std::size_t>(j)]);
}

} // namespace noisydro::compute
