#pragma once

#include <stdexcept>
#include <string>

namespace dcn {

// Parameter or argument outside the mathematical domain of an operation.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Matrix fails a structural requirement (symmetry, unit diagonal, PSD, ...).
struct MatrixError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A computation produced a non-finite intermediate or failed to converge.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input data (CSV contents, shape mismatches, bad config values).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed serialized artifact (network files, score tables).
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A model could not be fitted to the data at hand.
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace dcn
