#pragma once

#include <stdexcept>

namespace toricvol {

/// Bad user input: malformed specs, out-of-domain arguments.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to converge or produced unusable values.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Operation requested above its supported dimension.
struct DimensionLimitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace toricvol
