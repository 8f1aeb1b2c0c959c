#pragma once

#include <stdexcept>
#include <string>

namespace qsmooth {

// Error taxonomy. Everything derives from Error so callers can catch one type;
// the harness maps each to a FAIL verdict without aborting sibling experiments.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Point query outside the grid domain.
struct DomainError : Error {
    using Error::Error;
};

// Mismatched grids between fields / operators.
struct GridMismatchError : Error {
    using Error::Error;
};

// Grid too coarse for the requested object (metric bump, collar, 4th derivative).
struct ResolutionError : Error {
    using Error::Error;
};

// Metric not symmetric positive definite at some grid point.
struct MetricConstructionError : Error {
    using Error::Error;
};

// Spectral profile unbounded on the resolved spectrum (e.g. lambda^-2 without
// a band cutoff).
struct SingularProfileError : Error {
    using Error::Error;
};

// Homogeneous negative-order norm requested on data with zero-mode mass.
struct ZeroModeError : Error {
    using Error::Error;
};

// Evolution beyond horizon_guard with the sponge off.
struct ContaminationError : Error {
    using Error::Error;
};

// Krylov / eigensolver failure.
struct ConvergenceError : Error {
    using Error::Error;
};

// Empty probe set, undefined ratio, degenerate fit, bad config value.
struct InvalidArgumentError : Error {
    using Error::Error;
};

// Config file syntax / missing-field problems; carries line info in message.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace qsmooth
