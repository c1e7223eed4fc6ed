#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phaseop {

// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// Invalid argument values (angles out of range, duplicate sources, bad geometry...).
class InvalidInput : public Error {
public:
    using Error::Error;
};

// A matrix that must be inverted is numerically rank deficient. In the
// propagator this usually means coherent sources or a misdeclared source count.
class SingularBlock : public Error {
public:
    using Error::Error;
};

class NotHermitian : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    using Error::Error;
};

class DegenerateSubspace : public Error {
public:
    using Error::Error;
};

// ESPRIT produced an eigenvalue whose phase maps outside [-90, 90] degrees.
class InvalidShift : public Error {
public:
    using Error::Error;
};

// A noise-free covariance block was requested on the diagonal.
class SameIndexBlock : public Error {
public:
    using Error::Error;
};

class NoResolvedTrials : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

    // 1-based line number in the source file, 0 when not tied to a line.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

} // namespace phaseop
