#pragma once

#include <stdexcept>
#include <string>

namespace fraclab {

// Invalid parameter combinations detected before any computation starts.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Mathematical domain violations (x <= 0 in log_gamma, point outside the
// ball, evaluation on a pole, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct PoleError : DomainError {
    using DomainError::DomainError;
};

struct SingularityError : DomainError {
    using DomainError::DomainError;
};

// A runtime invariant of an assembled object failed (loss of positive
// definiteness, non-finite kernel ratio, ...).
struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IterationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace fraclab
