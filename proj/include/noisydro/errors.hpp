#pragma once
#include <stdexcept>

namespace noisydro {

// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad argument value: non-finite input, dimension mismatch, parameter out of range.
struct invalid_input_error : error {
    using error::error;
};

// lo/hi pair that does not describe a box, or a >= b for a noise support.
struct invalid_bounds_error : error {
    using error::error;
};

// Min-max normalization over a constant series (zero range).
struct degenerate_range_error : error {
    using error::error;
};

// Anything wrong with input data: missing file, malformed row, empty selection.
struct data_error : error {
    using error::error;
};

// Instance exceeds the size limits of a brute-force oracle.
struct size_guard_error : error {
    using error::error;
};

// Ratio metric requested with a nonpositive baseline.
struct undefined_baseline_error : error {
    using error::error;
};

// Utility evaluated outside its domain (per-entity utility <= 0).
struct utility_domain_error : error {
    using error::error;
};

// Empirical transport requested for a shape the exact solvers do not cover.
struct unsupported_shape_error : error {
    using error::error;
};

// Malformed or inconsistent experiment configuration.
struct config_error : error {
    using error::error;
};

} // namespace noisydro
