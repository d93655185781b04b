#include "doctest.h"

#include "noisydro/errors.hpp"
#include "noisydro/support.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

using namespace noisydro;

namespace {

// Writes a throwaway CSV and removes it when the test ends.
struct TempCsv {
    std::filesystem::path path;
    explicit TempCsv(const std::string& body) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("noisydro_test_" + std::to_string(counter++) + ".csv");
        std::ofstream out(path);
        out << body;
    }
    ~TempCsv() { std::filesystem::remove(path); }
};

} // namespace

TEST_CASE("db_to_linear") {
    CHECK(db_to_linear(0.0) == doctest::Approx(1.0));
    CHECK(db_to_linear(10.0) == doctest::Approx(10.0));
    CHECK(db_to_linear(20.0) == doctest::Approx(100.0));
    CHECK(db_to_linear(-10.0) == doctest::Approx(0.1));
    CHECK_THROWS_AS(db_to_linear(std::nan("")), invalid_input_error);
    CHECK_THROWS_AS(db_to_linear(INFINITY), invalid_input_error);
}

TEST_CASE("minmax_normalize") {
    CHECK(minmax_normalize({0, 5, 10}) == std::vector<double>{0.0, 0.5, 1.0});
    const auto r = minmax_normalize({1, 2, 4});
    CHECK(r[0] == doctest::Approx(0.0));
    CHECK(r[1] == doctest::Approx(1.0 / 3.0));
    CHECK(r[2] == doctest::Approx(1.0));
    CHECK_THROWS_AS(minmax_normalize({3, 3, 3}), degenerate_range_error);
    CHECK_THROWS_AS(minmax_normalize({3}), invalid_input_error);

    SUBCASE("idempotent on already-normalized data with the same extrema") {
        const std::vector<double> v{0.0, 0.2, 0.7, 1.0};
        CHECK(minmax_normalize(v) == v);
    }
    SUBCASE("order preserved") {
        const std::vector<double> v{4, 1, 3, 2};
        const auto n = minmax_normalize(v);
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t j = 0; j < v.size(); ++j)
                CHECK((v[i] < v[j]) == (n[i] < n[j]));
    }
}

TEST_CASE("build_support_grid") {
    SUBCASE("five levels on [0,1] in 1-D") {
        const auto g = build_support_grid(0.0, 1.0, 5, 1);
        REQUIRE(g.size() == 5);
        const std::vector<double> expect{0.0, 0.25, 0.5, 0.75, 1.0};
        for (std::size_t i = 0; i < 5; ++i) CHECK(g.points[i][0] == doctest::Approx(expect[i]));
    }
    SUBCASE("two levels in 2-D gives the corners") {
        const auto g = build_support_grid(0.0, 1.0, 2, 2);
        REQUIRE(g.size() == 4);
        CHECK(g.points[0] == std::vector<double>{0.0, 0.0});
        CHECK(g.points[1] == std::vector<double>{0.0, 1.0});
        CHECK(g.points[2] == std::vector<double>{1.0, 0.0});
        CHECK(g.points[3] == std::vector<double>{1.0, 1.0});
    }
    SUBCASE("three levels 1-D") {
        const auto g = build_support_grid(0.0, 1.0, 3, 1);
        REQUIRE(g.size() == 3);
        CHECK(g.points[1][0] == doctest::Approx(0.5));
    }
    SUBCASE("k^n points containing lo and hi") {
        for (int levels : {2, 3, 4}) {
            for (std::size_t dim : {1u, 2u, 3u}) {
                const auto g = build_support_grid(-0.5, 2.0, levels, dim);
                CHECK(g.size() == static_cast<std::size_t>(std::pow(levels, dim)));
                CHECK(g.points.front() == std::vector<double>(dim, -0.5));
                CHECK(g.points.back() == std::vector<double>(dim, 2.0));
                CHECK_NOTHROW(g.validate());
            }
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(build_support_grid(1.0, 0.0, 3, 2), invalid_bounds_error);
        CHECK_THROWS_AS(build_support_grid({0.0, 0.0}, {1.0, 0.0}, 3), invalid_bounds_error);
        CHECK_THROWS_AS(build_support_grid(0.0, 1.0, 1, 2), invalid_input_error);
    }
}

TEST_CASE("ingest_dataset") {
    const std::string header = "base_station,user_type,channel_gain_db,noise_power_db\n";

    SUBCASE("two records normalize to 0 and 1") {
        // ratios 2 and 8 in linear scale
        TempCsv f(header +
                  "BS1,Regular," + std::to_string(10.0 * std::log10(2.0)) + ",0\n" +
                  "BS1,VIP," + std::to_string(10.0 * std::log10(8.0)) + ",0\n" +
                  "BS2,Regular,5,0\n");
        const auto ds = ingest_dataset(f.path.string(), "BS1");
        REQUIRE(ds.size() == 2);
        CHECK(ds.dim == 1);
        CHECK(ds.samples[0][0] == doctest::Approx(0.0));
        CHECK(ds.samples[1][0] == doctest::Approx(1.0));
        CHECK(ds.provenance == "BS1");
    }
    SUBCASE("empty selection") {
        TempCsv f(header + "BS1,Regular,1,0\nBS1,VIP,2,0\n");
        CHECK_THROWS_AS(ingest_dataset(f.path.string(), "BS9"), data_error);
    }
    SUBCASE("header only") {
        TempCsv f(header);
        CHECK_THROWS_AS(ingest_dataset(f.path.string(), "BS1"), data_error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(ingest_dataset("/nonexistent/nope.csv", "BS1"), data_error);
    }
    SUBCASE("malformed rows") {
        TempCsv bad_field(header + "BS1,Regular,abc,0\n");
        CHECK_THROWS_AS(ingest_dataset(bad_field.path.string(), "BS1"), data_error);
        TempCsv bad_count(header + "BS1,Regular,1\n");
        CHECK_THROWS_AS(ingest_dataset(bad_count.path.string(), "BS1"), data_error);
        TempCsv bad_type(header + "BS1,Gold,1,0\n");
        CHECK_THROWS_AS(ingest_dataset(bad_type.path.string(), "BS1"), data_error);
        TempCsv bad_header("station,type,gain,noise\nBS1,Regular,1,0\n");
        CHECK_THROWS_AS(ingest_dataset(bad_header.path.string(), "BS1"), data_error);
    }
    SUBCASE("degenerate range") {
        TempCsv f(header + "BS1,Regular,3,0\nBS1,VIP,3,0\n");
        CHECK_THROWS_AS(ingest_dataset(f.path.string(), "BS1"), degenerate_range_error);
    }
}

TEST_CASE("ingest bundled dataset stays in the unit box") {
    const std::string path = std::string(NOISYDRO_DATA_DIR) + "/sample_sara.csv";
    for (const char* st : {"BS1", "BS2", "BS3", "BS4"}) {
        const auto ds = ingest_dataset(path, st);
        CHECK(ds.size() >= 70);
        CHECK(ds.size() <= 90);
        CHECK_NOTHROW(ds.validate_unit_range());
    }
}

TEST_CASE("ingest_user_type_matrix zips by record order and truncates") {
    const std::string header = "base_station,user_type,channel_gain_db,noise_power_db\n";
    // gains in dB chosen so linear ratios are 10^(g/10); noise fixed at 0 dB
    TempCsv f(header +
              "BS1,Regular,0,0\n"      // ratio 1   -> v = 0
              "BS1,VIP,3,0\n"          // ~2
              "BS1,HighDemand,10,0\n"  // 10  -> v = 1
              "BS1,Regular,5,0\n"      // ~3.16
              "BS1,VIP,7,0\n"          // ~5
              "BS1,HighDemand,9,0\n"   // ~7.9
              "BS1,Regular,2,0\n");    // extra Regular, dropped by truncation
    const auto ds = ingest_user_type_matrix(f.path.string(), "BS1");
    REQUIRE(ds.dim == 3);
    REQUIRE(ds.size() == 2); // min(3, 2, 2)
    // row 0 = first (Regular, VIP, HighDemand) values in record order
    CHECK(ds.samples[0][0] == doctest::Approx(0.0));
    CHECK(ds.samples[0][2] == doctest::Approx(1.0));
    CHECK(ds.samples[1][0] > 0.0);
    CHECK(ds.samples[1][2] < 1.0);
    CHECK_NOTHROW(ds.validate_unit_range());

    SUBCASE("missing type is an error") {
        TempCsv g(header + "BS1,Regular,0,0\nBS1,VIP,3,0\n");
        CHECK_THROWS_AS(ingest_user_type_matrix(g.path.string(), "BS1"), data_error);
    }
}

TEST_CASE("user type names round-trip") {
    for (auto t : {UserType::Regular, UserType::VIP, UserType::HighDemand})
        CHECK(parse_user_type(user_type_name(t)) == t);
}
