#include "doctest.h"

#include "noisydro/compute.hpp"
#include "noisydro/rng.hpp"

#include <cstring>
#include <vector>

using namespace noisydro;

namespace {

struct Instance {
    NoisyDataset data;
    SupportGrid grid;
    NoiseKernel kernel;
    FairnessUtility utility;
};

Instance random_instance(Rng& rng, std::size_t dim, std::size_t n_samples, int grid_levels) {
    Instance inst;
    inst.grid = build_support_grid(0.0, 1.0, grid_levels, dim);
    inst.data.dim = dim;
    for (std::size_t j = 0; j < n_samples; ++j) {
        std::vector<double> s(dim);
        for (auto& v : s) v = rng.next_u01();
        inst.data.samples.push_back(std::move(s));
    }
    inst.kernel = make_uniform(-0.02, 0.02, 3, dim);
    inst.utility = FairnessUtility{1.5, dim};
    return inst;
}

} // namespace

// The parallel kernels must reproduce the serial reference bit for bit; the
// solver's determinism contract rests on this.
TEST_CASE("parallel kernels match the serial reference exactly") {
    Rng rng(501);
    for (int rep = 0; rep < 3; ++rep) {
        const auto inst = random_instance(rng, 2 + rep % 2, 40 + 13 * rep, 4);
        const std::size_t n = inst.data.size(), k = inst.grid.size();

        std::vector<double> c_ser(n * k), c_par(n * k);
        compute::cost_matrix_serial(inst.kernel, inst.data, inst.grid, c_ser);
        compute::cost_matrix_parallel(inst.kernel, inst.data, inst.grid, c_par);
        CHECK(std::memcmp(c_ser.data(), c_par.data(), n * k * sizeof(double)) == 0);

        std::vector<double> w(inst.data.dim, 1.0 / static_cast<double>(inst.data.dim));
        std::vector<double> u_ser(k), u_par(k);
        compute::utilities_on_grid_serial(inst.utility, w, inst.grid, u_ser);
        compute::utilities_on_grid_parallel(inst.utility, w, inst.grid, u_par);
        CHECK(std::memcmp(u_ser.data(), u_par.data(), k * sizeof(double)) == 0);

        std::vector<double> a_ser(n), a_par(n);
        std::vector<std::int32_t> m_ser(n), m_par(n);
        compute::epigraph_min_serial(u_ser, c_ser, n, k, 0.37, a_ser, m_ser);
        compute::epigraph_min_parallel(u_ser, c_ser, n, k, 0.37, a_par, m_par);
        CHECK(std::memcmp(a_ser.data(), a_par.data(), n * sizeof(double)) == 0);
        CHECK(m_ser == m_par);
    }
}

TEST_CASE("cost matrix rows agree with expected_transport_cost") {
    Rng rng(502);
    const auto inst = random_instance(rng, 2, 6, 3);
    const std::size_t n = inst.data.size(), k = inst.grid.size();
    std::vector<double> c(n * k);
    compute::cost_matrix_serial(inst.kernel, inst.data, inst.grid, c);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t g = 0; g < k; ++g)
            CHECK(c[j * k + g] ==
                  doctest::Approx(expected_transport_cost(inst.kernel, inst.grid.points[g],
                                                          inst.data.samples[j]))
                      .epsilon(1e-15));
}

TEST_CASE("epigraph ties break toward the smallest grid index") {
    // two grid points with identical value under lambda = 0
    SupportGrid grid = build_support_grid(0.0, 1.0, 2, 1);
    std::vector<double> u{0.5, 0.5};
    std::vector<double> c{0.3, 0.1};
    std::vector<double> a(1);
    std::vector<std::int32_t> m(1);
    compute::epigraph_min_serial(u, c, 1, 2, 0.0, a, m);
    CHECK(m[0] == 0);
    CHECK(a[0] == doctest::Approx(0.5));
}
