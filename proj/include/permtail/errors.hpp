#pragma once

#include <stdexcept>
#include <string>

namespace permtail {

// Argument outside an admissible open interval, mismatched statistic, or an
// evaluation point where the requested quantity is undefined.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Iterative solver exhausted its budget without reaching tolerance.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// n beyond the configured table caps.
struct SizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Expansion order not available (no closed form at that depth).
struct OrderError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace permtail
