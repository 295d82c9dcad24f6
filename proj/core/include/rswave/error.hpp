#pragma once

#include <stdexcept>
#include <string>

namespace rswave {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inadmissible geometry (observation point inside the box, degenerate box, ...).
class GeometryError : public Error {
public:
    using Error::Error;
};

/// A weight-parameter condition could not be certified.
class ConditionError : public Error {
public:
    using Error::Error;
};

/// Solver failure: non-convergence, blow-up, unsupported mode.
class SolverError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Violated call contract (e.g. a Brownian increment read out of order).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace rswave
