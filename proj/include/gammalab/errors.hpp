#pragma once

#include <stdexcept>
#include <string>

namespace gammalab {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A scalar or structural argument is out of its contract (delta <= 0, bad ladder, ...).
struct InvalidParameter : Error {
    using Error::Error;
};

// A construction spec is inconsistent (overlapping flatten regions, gapped glue partition, ...).
struct InvalidSpec : Error {
    using Error::Error;
};

// Quadrature could not certify the requested tolerance (also: inconclusive energy evaluation,
// which is distinct from a certified +inf result).
struct QuadratureFailure : Error {
    using Error::Error;
};

// phi integrates to zero; it cannot be normalized.
struct DegenerateProfile : Error {
    using Error::Error;
};

// A constant estimation run produced no admissible candidate.
struct EstimationFailure : Error {
    using Error::Error;
};

// File parsing / writing problems.
struct IoError : Error {
    using Error::Error;
};

// Bad experiment configuration (unknown key, conflicting ladder specs, ...).
struct ConfigError : Error {
    using Error::Error;
};

} // namespace gammalab
