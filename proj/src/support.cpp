#include "noisydro/support.hpp"
#include "noisydro/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace noisydro {

void SupportGrid::validate() const {
    if (points.empty()) throw invalid_input_error("SupportGrid: empty point set");
    if (lo.size() != dim || hi.size() != dim)
        throw invalid_input_error("SupportGrid: bound dimension mismatch");
    for (const auto& p : points) {
        if (p.size() != dim) throw invalid_input_error("SupportGrid: point dimension mismatch");
        for (std::size_t i = 0; i < dim; ++i) {
            if (p[i] < lo[i] - 1e-12 || p[i] > hi[i] + 1e-12)
                throw invalid_input_error("SupportGrid: point outside [lo, hi]");
        }
    }
    if (!std::is_sorted(points.begin(), points.end()))
        throw invalid_input_error("SupportGrid: points not sorted");
    if (std::adjacent_find(points.begin(), points.end()) != points.end())
        throw invalid_input_error("SupportGrid: duplicate points");
}

void NoisyDataset::validate() const {
    if (samples.empty()) throw invalid_input_error("NoisyDataset: N must be >= 1");
    for (const auto& s : samples) {
        if (s.size() != dim) throw invalid_input_error("NoisyDataset: sample dimension mismatch");
        for (double v : s)
            if (!std::isfinite(v))
                throw invalid_input_error("NoisyDataset: non-finite component");
    }
}

void NoisyDataset::validate_unit_range() const {
    validate();
    for (const auto& s : samples)
        for (double v : s)
            if (!(v >= -1e-12 && v <= 1.0 + 1e-12))
                throw invalid_input_error("NoisyDataset: component outside [0, 1]");
}

UserType parse_user_type(const std::string& s) {
    if (s == "Regular") return UserType::Regular;
    if (s == "VIP") return UserType::VIP;
    if (s == "HighDemand") return UserType::HighDemand;
    throw data_error("unknown user_type: '" + s + "'");
}

const char* user_type_name(UserType t) {
    switch (t) {
        case UserType::Regular: return "Regular";
        case UserType::VIP: return "VIP";
        case UserType::HighDemand: return "HighDemand";
    }
    return "?";
}

double db_to_linear(double x_db) {
    if (!std::isfinite(x_db)) throw invalid_input_error("db_to_linear: non-finite input");
    return std::pow(10.0, x_db / 10.0);
}

std::vector<double> minmax_normalize(const std::vector<double>& values) {
    if (values.size() < 2)
        throw invalid_input_error("minmax_normalize: need at least two values");
    const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
    const double mn = *mn_it, mx = *mx_it;
    if (!(mx > mn))
        throw degenerate_range_error("minmax_normalize: zero range (all values equal)");
    std::vector<double> out(values.size());
    const double range = mx - mn;
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mn) / range;
    return out;
}

SupportGrid build_support_grid(const std::vector<double>& lo,
                               const std::vector<double>& hi,
                               int levels_per_dim) {
    if (lo.empty() || lo.size() != hi.size())
        throw invalid_input_error("build_support_grid: lo/hi size mismatch");
    if (levels_per_dim < 2)
        throw invalid_input_error("build_support_grid: levels_per_dim must be >= 2");
    const std::size_t n = lo.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!(lo[i] < hi[i]))
            throw invalid_bounds_error("build_support_grid: lo >= hi in some component");
    }

    std::vector<std::vector<double>> axes(n);
    for (std::size_t i = 0; i < n; ++i) {
        axes[i].resize(static_cast<std::size_t>(levels_per_dim));
        for (int l = 0; l < levels_per_dim; ++l)
            axes[i][static_cast<std::size_t>(l)] =
                lo[i] + (hi[i] - lo[i]) * static_cast<double>(l) / (levels_per_dim - 1);
    }

    SupportGrid grid;
    grid.dim = n;
    grid.lo = lo;
    grid.hi = hi;
    // Odometer with the first coordinate as the slowest digit yields the
    // points already in lexicographic order.
    std::vector<std::size_t> idx(n, 0);
    std::vector<double> p(n);
    while (true) {
        for (std::size_t i = 0; i < n; ++i) p[i] = axes[i][idx[i]];
        grid.points.push_back(p);
        std::size_t d = n;
        while (d > 0) {
            --d;
            if (++idx[d] < axes[d].size()) break;
            idx[d] = 0;
            if (d == 0) {
                grid.points.erase(std::unique(grid.points.begin(), grid.points.end()),
                                  grid.points.end());
                grid.validate();
                return grid;
            }
        }
    }
}

SupportGrid build_support_grid(double lo, double hi, int levels_per_dim, std::size_t dim) {
    return build_support_grid(std::vector<double>(dim, lo), std::vector<double>(dim, hi),
                              levels_per_dim);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    for (auto& f : fields) {
        const auto a = f.find_first_not_of(" \t");
        const auto b = f.find_last_not_of(" \t");
        f = (a == std::string::npos) ? std::string() : f.substr(a, b - a + 1);
    }
    return fields;
}

double parse_double_field(const std::string& s, std::size_t line_no, const char* what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        std::ostringstream msg;
        msg << "malformed " << what << " '" << s << "' on line " << line_no;
        throw data_error(msg.str());
    }
}

} // namespace

std::vector<RawRecord> read_records_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open dataset file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw data_error("empty dataset file: " + path);
    const auto header = split_csv_line(line);
    const std::vector<std::string> expected = {"base_station", "user_type",
                                               "channel_gain_db", "noise_power_db"};
    if (header != std::vector<std::string>(expected.begin(), expected.end()))
        throw data_error("unexpected CSV header in " + path);

    std::vector<RawRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 4) {
            std::ostringstream msg;
            msg << "expected 4 fields, got " << fields.size() << " on line " << line_no;
            throw data_error(msg.str());
        }
        RawRecord rec;
        rec.base_station = fields[0];
        rec.user_type = parse_user_type(fields[1]);
        rec.channel_gain_db = parse_double_field(fields[2], line_no, "channel_gain_db");
        rec.noise_power_db = parse_double_field(fields[3], line_no, "noise_power_db");
        records.push_back(std::move(rec));
    }
    return records;
}

namespace {

// Normalized gain/noise ratios for one station, in record order, with the
// matching user types.
std::pair<std::vector<double>, std::vector<UserType>>
station_normalized_ratios(const std::string& path, const std::string& base_station) {
    const auto records = read_records_csv(path);
    std::vector<double> ratios;
    std::vector<UserType> types;
    for (const auto& rec : records) {
        if (rec.base_station != base_station) continue;
        ratios.push_back(db_to_linear(rec.channel_gain_db) / db_to_linear(rec.noise_power_db));
        types.push_back(rec.user_type);
    }
    if (ratios.empty())
        throw data_error("no records for base station '" + base_station + "'");
    return {minmax_normalize(ratios), types};
}

} // namespace

NoisyDataset ingest_dataset(const std::string& path, const std::string& base_station) {
    const auto [values, types] = station_normalized_ratios(path, base_station);
    (void)types;
    NoisyDataset ds;
    ds.dim = 1;
    ds.provenance = base_station;
    ds.samples.reserve(values.size());
    for (double v : values) ds.samples.push_back({v});
    ds.validate_unit_range();
    return ds;
}

NoisyDataset ingest_user_type_matrix(const std::string& path,
                                     const std::string& base_station) {
    const auto [values, types] = station_normalized_ratios(path, base_station);

    std::vector<std::vector<double>> by_type(3);
    for (std::size_t i = 0; i < values.size(); ++i)
        by_type[static_cast<std::size_t>(types[i])].push_back(values[i]);

    std::size_t n_rows = by_type[0].size();
    for (const auto& series : by_type) n_rows = std::min(n_rows, series.size());
    if (n_rows == 0) {
        for (std::size_t t = 0; t < 3; ++t) {
            if (by_type[t].empty())
                throw data_error(std::string("station '") + base_station +
                                 "' has no records for user type " +
                                 user_type_name(static_cast<UserType>(t)));
        }
    }

    NoisyDataset ds;
    ds.dim = 3;
    ds.provenance = base_station;
    ds.samples.reserve(n_rows);
    for (std::size_t j = 0; j < n_rows; ++j)
        ds.samples.push_back({by_type[0][j], by_type[1][j], by_type[2][j]});
    ds.validate_unit_range();
    return ds;
}

} // namespace noisydro
