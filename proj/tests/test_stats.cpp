#include "doctest.h"

#include "noisydro/errors.hpp"
#include "noisydro/rng.hpp"
#include "noisydro/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace noisydro;

namespace {

SyntheticWorld make_world(std::uint64_t seed) {
    SyntheticWorld w;
    w.grid = build_support_grid(0.0, 1.0, 5, 1);
    w.pmf = {0.1, 0.2, 0.4, 0.2, 0.1};
    w.kernel = make_uniform(-0.01, 0.01, 3, 1);
    w.utility = FairnessUtility{0.0, 1};
    w.seed = seed;
    return w;
}

std::vector<std::vector<double>> random_points(Rng& rng, std::size_t m, std::size_t dim) {
    std::vector<std::vector<double>> pts(m, std::vector<double>(dim));
    for (auto& p : pts)
        for (auto& v : p) v = rng.next_u01();
    return pts;
}

double brute_force_w1(const std::vector<std::vector<double>>& P,
                      const std::vector<std::vector<double>>& Q) {
    std::vector<std::size_t> perm(P.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < P.size(); ++i)
            for (std::size_t d = 0; d < P[i].size(); ++d)
                total += std::abs(P[i][d] - Q[perm[i]][d]);
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(P.size());
}

} // namespace

TEST_CASE("wasserstein1_empirical basics") {
    CHECK(wasserstein1_empirical({{0.3, 0.4}, {0.9, 0.1}}, {{0.3, 0.4}, {0.9, 0.1}}) ==
          doctest::Approx(0.0));
    CHECK(wasserstein1_empirical({{0.0}, {1.0}}, {{0.5}, {0.5}}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(wasserstein1_empirical({}, {{0.5}}), invalid_input_error);
    CHECK_THROWS_AS(
        wasserstein1_empirical({{0.1, 0.2}}, {{0.1, 0.2}, {0.3, 0.4}, {0.5, 0.6}}),
        unsupported_shape_error);
}

TEST_CASE("assignment path equals the exhaustive permutation minimum") {
    Rng rng(21);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t m = 2 + rng.next_below(5); // up to 6
        const auto P = random_points(rng, m, 2);
        const auto Q = random_points(rng, m, 2);
        CHECK(std::abs(wasserstein1_empirical(P, Q) - brute_force_w1(P, Q)) <= 1e-10);
    }
}

TEST_CASE("1-D sorted formula agrees with the assignment value") {
    Rng rng(22);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t m = 2 + rng.next_below(5);
        auto P = random_points(rng, m, 1);
        auto Q = random_points(rng, m, 1);
        // mean absolute difference of sorted values
        auto ps = P, qs = Q;
        std::sort(ps.begin(), ps.end());
        std::sort(qs.begin(), qs.end());
        double sorted_formula = 0.0;
        for (std::size_t i = 0; i < m; ++i) sorted_formula += std::abs(ps[i][0] - qs[i][0]);
        sorted_formula /= static_cast<double>(m);
        CHECK(wasserstein1_empirical(P, Q) == doctest::Approx(sorted_formula).epsilon(1e-12));
        CHECK(std::abs(wasserstein1_empirical(P, Q) - brute_force_w1(P, Q)) <= 1e-10);
    }
}

TEST_CASE("wasserstein1_empirical is a metric on equal-size sets") {
    Rng rng(23);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t m = 3;
        const auto P = random_points(rng, m, 2);
        const auto Q = random_points(rng, m, 2);
        const auto R = random_points(rng, m, 2);
        const double pq = wasserstein1_empirical(P, Q);
        const double qp = wasserstein1_empirical(Q, P);
        CHECK(std::abs(pq - qp) <= 1e-10);                       // symmetry
        CHECK(wasserstein1_empirical(P, P) <= 1e-12);            // identity
        CHECK(pq <= wasserstein1_empirical(P, R) +               // triangle
                        wasserstein1_empirical(R, Q) + 1e-10);
        if (pq < 1e-12) continue;
        CHECK(pq > 0.0); // distinct multisets separate
    }
}

TEST_CASE("epsilon_n") {
    EpsilonSchedule s3{1.0, 1.0, 2.0, 3};
    CHECK(epsilon_n(s3, std::exp(-1.0), 2) == doctest::Approx(std::pow(0.5, 1.0 / 3.0)));
    EpsilonSchedule s1{1.0, 1.0, 2.0, 1};
    CHECK(epsilon_n(s1, std::exp(-1.0), 4) == doctest::Approx(0.5));

    SUBCASE("small-N branch uses the 1/a exponent") {
        EpsilonSchedule s{100.0, 0.5, 3.0, 1};
        const double num = std::log(100.0 / 0.1);
        REQUIRE(1.0 < num / 0.5); // N = 1 falls below the threshold
        CHECK(epsilon_n(s, 0.1, 1) == doctest::Approx(std::pow(num / 0.5, 1.0 / 3.0)));
    }
    SUBCASE("monotone decay to zero") {
        EpsilonSchedule s{std::exp(1.0), 2.0, 2.0, 1};
        double prev = 1e300;
        for (std::int64_t N : {1, 10, 100, 1000, 100000}) {
            const double e = epsilon_n(s, 0.05, N);
            CHECK(e < prev);
            prev = e;
        }
        CHECK(prev < 1e-2);
    }
    SUBCASE("parameter validation") {
        CHECK_THROWS_AS(epsilon_n(s1, 0.0, 10), invalid_input_error);
        CHECK_THROWS_AS(epsilon_n(s1, 1.0, 10), invalid_input_error);
        CHECK_THROWS_AS(epsilon_n(s1, 0.5, 0), invalid_input_error);
        EpsilonSchedule bad{0.0, 1.0, 2.0, 1};
        CHECK_THROWS_AS(bad.validate(), invalid_input_error);
        EpsilonSchedule bad_a{1.0, 1.0, 1.0, 1};
        CHECK_THROWS_AS(bad_a.validate(), invalid_input_error);
    }
}

TEST_CASE("sampling the synthetic world is reproducible") {
    const auto world = make_world(77);
    Rng a = Rng::stream(world.seed, 0);
    Rng b = Rng::stream(world.seed, 0);
    const auto d1 = sample_noisy_dataset(world, 25, a);
    const auto d2 = sample_noisy_dataset(world, 25, b);
    CHECK(d1.samples == d2.samples);
    Rng c = Rng::stream(world.seed, 1);
    CHECK(sample_noisy_dataset(world, 25, c).samples != d1.samples);
}

TEST_CASE("coverage_experiment") {
    SUBCASE("dirac world is covered at every radius") {
        SyntheticWorld w;
        w.grid = SupportGrid{{{0.5}}, 1, {0.5}, {0.5}};
        w.pmf = {1.0};
        w.kernel = make_dirac(1);
        w.utility = FairnessUtility{0.0, 1};
        w.seed = 5;
        EpsilonSchedule sched{std::exp(1.0), 1.0, 2.0, 1};
        const auto pts = coverage_experiment(w, sched, 0.1, {5, 20}, 100);
        for (const auto& p : pts) CHECK(p.fraction == doctest::Approx(1.0));
    }
    SUBCASE("coverage is nondecreasing in the radius at fixed N") {
        const auto world = make_world(6);
        const auto distances = coverage_distances(world, 30, 150);
        double prev = -1.0;
        for (double eps : {0.01, 0.05, 0.1, 0.3}) {
            double frac = 0.0;
            for (double d : distances) frac += d <= eps ? 1.0 : 0.0;
            frac /= static_cast<double>(distances.size());
            CHECK(frac >= prev);
            prev = frac;
        }
    }
    SUBCASE("reference-sample path approaches the exact marginal distance") {
        const auto world = make_world(6);
        const auto exact = coverage_distances(world, 40, 60);
        const auto approx = coverage_distances(world, 40, 60, 0, 50);
        double worst = 0.0;
        for (std::size_t t = 0; t < exact.size(); ++t)
            worst = std::max(worst, std::abs(exact[t] - approx[t]));
        // the reference empirical of 50 N draws sits within O(1/sqrt(50 N))
        // of the true marginal
        CHECK(worst <= 0.05);
    }
    SUBCASE("calibrated schedule keeps coverage near the target") {
        const auto world = make_world(7);
        const double beta = 0.1;
        const double c2 = calibrate_c2(world, std::exp(1.0), beta, 20, 200);
        EpsilonSchedule sched{std::exp(1.0), c2, 2.0, 1};
        const auto pts = coverage_experiment(world, sched, beta, {20, 50, 100}, 200);
        for (const auto& p : pts) CHECK(p.fraction >= 1.0 - beta - 0.03);
    }
    SUBCASE("guards") {
        const auto world = make_world(8);
        EpsilonSchedule sched{std::exp(1.0), 1.0, 2.0, 1};
        CHECK_THROWS_AS(coverage_experiment(world, sched, 0.1, {10}, 50),
                        invalid_input_error);
        SyntheticWorld w2 = world;
        w2.grid = build_support_grid(0.0, 1.0, 3, 2);
        w2.pmf.assign(9, 1.0 / 9.0);
        w2.kernel = make_uniform(-0.01, 0.01, 3, 2);
        w2.utility = FairnessUtility{0.0, 2};
        CHECK_THROWS_AS(coverage_distances(w2, 10, 100), unsupported_shape_error);
    }
}

TEST_CASE("consistency_experiment") {
    SUBCASE("dirac kernel with zero radius converges by the law of large numbers") {
        SyntheticWorld w = make_world(9);
        w.kernel = make_dirac(1);
        // c1 <= beta_N forces radius zero along the whole schedule
        EpsilonSchedule sched{1e-12, 1.0, 2.0, 1};
        const auto pts = consistency_experiment(w, sched, 0.5, {10, 2000});
        REQUIRE(pts.size() == 2);
        CHECK(pts[0].epsilon_N == 0.0);
        CHECK(pts[1].abs_err < 0.05);
    }
    SUBCASE("error shrinks along the schedule and the radius vanishes") {
        const auto world = make_world(10);
        const double c2 = calibrate_c2(world, std::exp(1.0), 0.05, 10, 150);
        EpsilonSchedule sched{std::exp(1.0), c2, 2.0, 1};
        const auto pts = consistency_experiment(world, sched, 0.05, {10, 1000});
        REQUIRE(pts.size() == 2);
        CHECK(pts[1].epsilon_N < pts[0].epsilon_N);
        CHECK(pts[1].abs_err < pts[0].abs_err);
        // upper-bound step of the consistency argument, with sampling slack
        CHECK(pts[1].g_hat <= pts[1].g_so + 0.05);
    }
    SUBCASE("Ns must increase") {
        const auto world = make_world(11);
        EpsilonSchedule sched{std::exp(1.0), 1.0, 2.0, 1};
        CHECK_THROWS_AS(consistency_experiment(world, sched, 0.05, {100, 10}),
                        invalid_input_error);
    }
}

TEST_CASE("biased_bound_experiment") {
    const auto world = make_world(12);
    const auto pts = biased_bound_experiment(world, {0.0, 0.005, 0.01, 0.02}, 25, 0.05);
    REQUIRE(pts.size() == 4);
    for (const auto& p : pts) CHECK(p.bound_ok);
    // delta = 0 reduces to plain dominance
    CHECK(pts[0].g_noisy_biased >= pts[0].g_direct - 1e-6);
    SUBCASE("the shifted kernel carries exactly the requested mean") {
        const auto base = recenter(world.kernel);
        const auto shifted = shift_kernel(base, {0.01});
        CHECK(kernel_mean(shifted).bias_norm == doctest::Approx(0.01));
    }
}

TEST_CASE("wasserstein1_discrete_1d validates masses") {
    CHECK_THROWS_AS(wasserstein1_discrete_1d(std::vector<double>{0.0, 1.0},
                                             std::vector<double>{0.4, 0.4},
                                             std::vector<double>{0.5},
                                             std::vector<double>{1.0}),
                    invalid_input_error);
    CHECK(wasserstein1_discrete_1d(std::vector<double>{0.0, 1.0},
                                   std::vector<double>{0.5, 0.5},
                                   std::vector<double>{0.5},
                                   std::vector<double>{1.0}) == doctest::Approx(0.5));
}
