#pragma once

#include <stdexcept>
#include <string>

namespace modest {

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised when vertex enumeration would need more than 2^12 corners.
struct UnsupportedDimension : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct EmptyDataset : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The abstraction LP has no solution for the given samples/sigma; the
// caller must refine the sample set or loosen sigma.
struct AbstractionInfeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Every hypothesis was rejected: the model bank does not explain the data.
struct AllModesEliminated : std::runtime_error {
    explicit AllModesEliminated(long step)
        : std::runtime_error("all modes eliminated at step " + std::to_string(step)),
          step(step) {}
    long step;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace modest
