#pragma once

#include <stdexcept>
#include <string>

namespace singprop {

// Base class for every failure raised by the library. The CLI maps
// ConfigError to exit code 2 and everything else to exit code 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of a function.
struct DomainError : Error {
    using Error::Error;
};

// Inconsistent or unsupported parameters.
struct ParameterError : Error {
    using Error::Error;
};

// Iteration failed to converge, step size collapsed, etc.
struct NumericError : Error {
    using Error::Error;
};

// The discretization cannot represent the requested object.
struct ResolutionError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace singprop
