#pragma once

#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>

namespace schedopt {

/// Random engine used throughout; every component takes it by reference and
/// never stores it.
using Rng = std::mt19937_64;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed user input: scenario files, constraint text, parameter domains.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Constraint text that does not parse or type-check. `column` is 1-based.
class ParseError : public ValidationError {
public:
    ParseError(std::size_t column, const std::string& message)
        : ValidationError("column " + std::to_string(column) + ": " + message), column_(column) {}

    std::size_t column() const { return column_; }

private:
    std::size_t column_;
};

/// The known constraints cannot be materialized within the node cap.
class SpaceTooLargeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// The evaluator process violated the wire protocol or died.
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// Linear algebra failure, e.g. a Gram matrix that is not positive definite.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace schedopt
