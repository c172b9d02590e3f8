#pragma once

#include <stdexcept>
#include <string>

namespace esbgk {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user input: config files, grid parameters, boundary descriptors.
struct config_error : error {
    using error::error;
};

// Boundary data that cannot drive the iteration (zero mass, negative values).
struct degenerate_data_error : error {
    using error::error;
};

// Temperature tensor lost positive definiteness beyond the hard floor.
struct tensor_degeneracy_error : error {
    tensor_degeneracy_error(const std::string& what, double lambda_min_, double floor_)
        : error(what), lambda_min(lambda_min_), floor(floor_) {}
    double lambda_min;
    double floor;
};

// A quantity the iteration assumes positive (wall emission weight) went nonpositive.
struct hypothesis_violation_error : error {
    using error::error;
};

// NaN or overflow detected in an iterate.
struct numerical_error : error {
    using error::error;
};

} // namespace esbgk
