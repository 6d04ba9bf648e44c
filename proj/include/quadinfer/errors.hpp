#pragma once

#include <stdexcept>
#include <string>

namespace quadinfer {

// Structurally invalid input: size mismatch, empty data, argument out of range.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Function argument outside its mathematical domain (e.g. quantile at 0 or 1).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Base for numerical-degeneracy failures. CLI maps these to exit code 3.
class DegeneracyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Design matrix has no usable columns (all dropped by rank repair, or zero).
class DegenerateDesignError : public DegeneracyError {
public:
    using DegeneracyError::DegeneracyError;
};

// X^T X is not positive definite at the working tolerance.
class SingularGramError : public DegeneracyError {
public:
    using DegeneracyError::DegeneracyError;
};

// A test's variance estimate collapsed to the zero-scale floor.
class DegenerateVarianceError : public DegeneracyError {
public:
    using DegeneracyError::DegeneracyError;
};

// Signal-plus-noise scale is nonpositive; ratio estimators are undefined.
class DegenerateScaleError : public DegeneracyError {
public:
    using DegeneracyError::DegeneracyError;
};

// A bias-corrected norm used as a denominator is nonpositive.
class DegenerateDenominatorError : public DegeneracyError {
public:
    using DegeneracyError::DegeneracyError;
};

// Malformed input file. CLI maps this to exit code 2.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration or flag combination. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace quadinfer
