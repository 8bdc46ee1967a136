#pragma once

#include <stdexcept>
#include <string>

namespace angio {

// Error taxonomy, mirrored by the CLI exit codes:
//   ConfigError -> 2, DataError (and subtypes) -> 3, NumericError -> 4.

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or unsupported file contents.
struct FormatError : DataError {
    using DataError::DataError;
};

// Dimension mismatch between operands.
struct ShapeError : DataError {
    using DataError::DataError;
};

// Value outside the domain an operation requires (e.g. depth <= 0).
struct DomainError : DataError {
    using DataError::DataError;
};

// Non-finite values produced where the contract requires finite ones.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace angio
