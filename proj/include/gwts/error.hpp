#pragma once

#include <stdexcept>
#include <string>

namespace gwts {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input row. `line()` is 1-based and counts the header.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ConflictError : public Error {
public:
    using Error::Error;
};

class EmptyInputError : public Error {
public:
    using Error::Error;
};

/// Argument outside the operation's domain (bad ratio, h < 1, overlapping sets...).
class DomainError : public Error {
public:
    using Error::Error;
};

class SampleSizeError : public Error {
public:
    using Error::Error;
};

class MissingDataError : public Error {
public:
    using Error::Error;
};

/// Rank-deficient regressors or a covariance that is not positive definite.
class SingularityError : public Error {
public:
    using Error::Error;
};

class DegeneracyError : public Error {
public:
    using Error::Error;
};

class ComparisonError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// An operation was requested before its prerequisite artifact exists.
class StateError : public Error {
public:
    using Error::Error;
};

}  // namespace gwts
