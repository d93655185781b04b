#pragma once
#include <cstddef>
#include <string>
#include <vector>

namespace noisydro {

// Finite discretization of a compact box support. Points are distinct and
// sorted lexicographically; every point lies in [lo, hi] componentwise.
struct SupportGrid {
    std::vector<std::vector<double>> points;
    std::size_t dim = 0;
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t size() const { return points.size(); }
    void validate() const;
};

// Observed sample set. Ingested data is normalized so that all components
// lie in [0, 1]; synthetic noisy draws may exit the unit box since the noisy
// support is a superset of the latent one.
struct NoisyDataset {
    std::vector<std::vector<double>> samples;
    std::size_t dim = 0;
    std::string provenance;

    std::size_t size() const { return samples.size(); }
    void validate() const;            // structure: N >= 1, dims, finite values
    void validate_unit_range() const; // components in [0, 1] (post-normalization)
};

enum class UserType { Regular, VIP, HighDemand };

UserType parse_user_type(const std::string& s);
const char* user_type_name(UserType t);

struct RawRecord {
    std::string base_station;
    UserType user_type = UserType::Regular;
    double channel_gain_db = 0.0;
    double noise_power_db = 0.0;
};

// 10^(x_db / 10). Throws invalid_input_error on non-finite input.
double db_to_linear(double x_db);

// (v - min) / (max - min) per element. Requires at least two distinct
// values; throws degenerate_range_error when the range is zero.
std::vector<double> minmax_normalize(const std::vector<double>& values);

// Cartesian product of uniformly spaced per-dimension grids with
// `levels_per_dim` points each; levels^n points total, sorted, deduplicated.
SupportGrid build_support_grid(const std::vector<double>& lo,
                               const std::vector<double>& hi,
                               int levels_per_dim);

// Scalar convenience for cubic boxes [lo, hi]^dim.
SupportGrid build_support_grid(double lo, double hi, int levels_per_dim,
                               std::size_t dim);

// Parses the full CSV file (schema:
// base_station,user_type,channel_gain_db,noise_power_db).
std::vector<RawRecord> read_records_csv(const std::string& path);

// One scalar sample per record of the given base station:
// minmax_normalize(gain_linear / noise_linear) over the station's records.
NoisyDataset ingest_dataset(const std::string& path,
                            const std::string& base_station);

// Per-user-type sample vectors for one station. Dimension i holds the i-th
// user type in enum order (Regular, VIP, HighDemand); rows are zipped by
// record order within the station and truncated to the shortest type series.
// Normalization is per-station over all of the station's records.
NoisyDataset ingest_user_type_matrix(const std::string& path,
                                     const std::string& base_station);

} // namespace noisydro
