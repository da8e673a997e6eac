#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nsqp {

/// Invalid argument or precondition violation (bad grid size, mismatched grids, malformed input).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Fields defined on different spectral grids were combined.
class GridMismatchError : public ValidationError {
public:
    GridMismatchError() : ValidationError("fields live on different spectral grids") {}
};

/// A time integrator produced a non-finite state or exceeded the blow-up guard.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(std::size_t step, const std::string& what)
        : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

}  // namespace nsqp
