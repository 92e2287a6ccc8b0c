#pragma once

#include <stdexcept>
#include <string>

namespace cogen {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid shapes, dimension mismatches, bad arguments.
struct ShapeError : Error {
    using Error::Error;
};

// Malformed files, containers, checkpoints.
struct DataError : Error {
    using Error::Error;
};

// Non-finite values produced by a numeric primitive or training step.
struct NumericError : Error {
    using Error::Error;
};

}  // namespace cogen
