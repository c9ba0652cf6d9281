#pragma once

#include <stdexcept>
#include <string>

namespace fieldscan {

// Base of all library errors. Two branches: statistical errors (the input is
// structurally valid but outside the method's domain) and input errors
// (malformed files, bad dimensions, bad arguments). The CLI maps the former
// to exit code 1 and the latter to exit code 2.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StatError : Error {
    using Error::Error;
};

struct InputError : Error {
    using Error::Error;
};

struct NoValidPartition : StatError {
    using StatError::StatError;
};

struct ZeroVariance : StatError {
    using StatError::StatError;
};

struct TooFewBlocks : StatError {
    using StatError::StatError;
};

struct LagOutOfRange : StatError {
    using StatError::StatError;
};

struct SizeGuardExceeded : StatError {
    using StatError::StatError;
};

struct NotSymmetric : StatError {
    using StatError::StatError;
};

struct SingularFactor : StatError {
    using StatError::StatError;
};

struct InvalidRho : StatError {
    using StatError::StatError;
};

struct DegenerateGrid : StatError {
    using StatError::StatError;
};

struct InvalidP : StatError {
    using StatError::StatError;
};

struct InsufficientNullSample : StatError {
    using StatError::StatError;
};

struct DimensionMismatch : InputError {
    using InputError::InputError;
};

struct NotDivisible : InputError {
    using InputError::InputError;
};

struct ParseError : InputError {
    using InputError::InputError;
};

struct IOError : InputError {
    using InputError::InputError;
};

struct ConfigError : InputError {
    using InputError::InputError;
};

struct UnknownKind : InputError {
    using InputError::InputError;
};

}  // namespace fieldscan
