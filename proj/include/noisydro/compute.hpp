#pragma once
#include "noisydro/noise.hpp"
#include "noisydro/support.hpp"
#include "noisydro/utility.hpp"

#include <cstddef>
#include <cstdint>
#include <span>

// Hot inner loops of the solver, each in a serial reference version and an
// OpenMP version. The parallel variants write disjoint rows in the same
// per-row evaluation order, so results are bit-identical to the serial ones;
// tests assert this and the bench target compares their throughput.
namespace noisydro::compute {

bool openmp_enabled();

// c[j*K + k] = expected transport cost between sample j and grid point k.
void cost_matrix_serial(const NoiseKernel& kernel, const NoisyDataset& data,
                        const SupportGrid& grid, std::span<double> c);
void cost_matrix_parallel(const NoiseKernel& kernel, const NoisyDataset& data,
                          const SupportGrid& grid, std::span<double> c);

// u[k] = aggregate utility of w at grid point k.
void utilities_on_grid_serial(const FairnessUtility& utility, std::span<const double> w,
                              const SupportGrid& grid, std::span<double> u);
void utilities_on_grid_parallel(const FairnessUtility& utility, std::span<const double> w,
                                const SupportGrid& grid, std::span<double> u);

// a[j] = min_k (u[k] + lambda * c[j*K + k]), ties broken by smallest k.
void epigraph_min_serial(std::span<const double> u, std::span<const double> c,
                         std::size_t n_samples, std::size_t n_grid, double lambda,
                         std::span<double> a, std::span<std::int32_t> argmin);
void epigraph_min_parallel(std::span<const double> u, std::span<const double> c,
                           std::size_t n_samples, std::size_t n_grid, double lambda,
                           std::span<double> a, std::span<std::int32_t> argmin);

} // namespace noisydro::compute
