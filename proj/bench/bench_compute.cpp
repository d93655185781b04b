// Times the serial reference kernels against their OpenMP variants on a
// synthetic instance large enough to matter, and checks they agree bitwise.
//
//   bench_compute [n_samples] [grid_levels_per_dim] [repeats]

#include "noisydro/compute.hpp"
#include "noisydro/rng.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace noisydro;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class F>
double time_best_of(int repeats, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, seconds_since(t0));
    }
    return best;
}

} // namespace

int main(int argc, char** argv) {
    const std::size_t n_samples = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 4000;
    const int levels = argc > 2 ? std::atoi(argv[2]) : 9;
    const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;
    const std::size_t dim = 3;

    Rng rng(12345);
    const SupportGrid grid = build_support_grid(0.0, 1.0, levels, dim);
    const NoiseKernel kernel = make_uniform(-0.01, 0.01, 3, dim);
    NoisyDataset data;
    data.dim = dim;
    for (std::size_t j = 0; j < n_samples; ++j) {
        std::vector<double> s(dim);
        for (auto& v : s) v = rng.next_u01();
        data.samples.push_back(std::move(s));
    }
    const FairnessUtility utility{2.0, dim};
    const std::vector<double> w(dim, 1.0 / static_cast<double>(dim));

    const std::size_t K = grid.size();
#ifdef _OPENMP
    const int threads = omp_get_max_threads();
#else
    const int threads = 1;
#endif
    std::printf("N=%zu  K=%zu (levels=%d, dim=%zu)  offsets=%zu  threads=%d\n", n_samples, K,
                levels, dim, kernel.size(), threads);

    std::vector<double> c_ser(n_samples * K), c_par(n_samples * K);
    std::vector<double> u(K), a_ser(n_samples), a_par(n_samples);
    std::vector<std::int32_t> m_ser(n_samples), m_par(n_samples);

    const double t_cost_ser = time_best_of(
        repeats, [&] { compute::cost_matrix_serial(kernel, data, grid, c_ser); });
    const double t_cost_par = time_best_of(
        repeats, [&] { compute::cost_matrix_parallel(kernel, data, grid, c_par); });
    const bool cost_same =
        std::memcmp(c_ser.data(), c_par.data(), c_ser.size() * sizeof(double)) == 0;

    compute::utilities_on_grid_serial(utility, w, grid, u);

    const double t_epi_ser = time_best_of(repeats, [&] {
        compute::epigraph_min_serial(u, c_ser, n_samples, K, 0.7, a_ser, m_ser);
    });
    const double t_epi_par = time_best_of(repeats, [&] {
        compute::epigraph_min_parallel(u, c_ser, n_samples, K, 0.7, a_par, m_par);
    });
    const bool epi_same =
        std::memcmp(a_ser.data(), a_par.data(), a_ser.size() * sizeof(double)) == 0 &&
        m_ser == m_par;

    std::printf("%-14s %10s %10s %8s %s\n", "kernel", "serial", "openmp", "speedup",
                "bit-identical");
    std::printf("%-14s %9.3fs %9.3fs %7.2fx %s\n", "cost_matrix", t_cost_ser, t_cost_par,
                t_cost_ser / t_cost_par, cost_same ? "yes" : "NO");
    std::printf("%-14s %9.3fs %9.3fs %7.2fx %s\n", "epigraph_min", t_epi_ser, t_epi_par,
                t_epi_ser / t_epi_par, epi_same ? "yes" : "NO");
    return cost_same && epi_same ? 0 : 1;
}
