#pragma once

#include <stdexcept>
#include <string>

namespace tegrid {

/// Argument outside its admissible range (non-positive frequency, step, ratio, ...).
struct InvalidParameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Operating point violates a model assumption (e.g. PCC phase outside (-pi/2, pi/2)).
struct AssumptionViolation : std::domain_error {
    using std::domain_error::domain_error;
};

/// Query before the schedule is defined.
struct ScheduleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite value; the message names the offending quantity and time.
struct NumericFault : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Estimate cannot be mapped back to physical parameters (recovery refused).
struct NonPhysicalEstimate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Requested window exceeds the recorded history.
struct WindowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed scenario file or inconsistent configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File could not be read or written; the message carries the path.
struct FileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A reference computation failed to converge (test infrastructure fault).
struct OracleFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace tegrid
