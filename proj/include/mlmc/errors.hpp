#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mlmc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes disagree, or a square matrix was required.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Input is well-formed but violates a precondition of the solver (bad diagonal,
/// absorbing rows without opt-in, zero vector, duplicate worker ids, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A numeric routine refuses its argument (pole, unsupported parameter box, overflow).
class DomainError : public Error {
public:
    using Error::Error;
};

/// The dense reference solution cannot be computed for this input.
class OracleUnavailable : public Error {
public:
    using Error::Error;
};

} // namespace mlmc
