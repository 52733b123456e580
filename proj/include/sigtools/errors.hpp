#ifndef SIGTOOLS_ERRORS_HPP
#define SIGTOOLS_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sigtools {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Errors caused by malformed or inconsistent input data.
class DataError : public Error {
public:
    using Error::Error;
};

/// Errors raised when a numerical procedure fails or a numerical
/// precondition is violated.
class NumericalError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public DataError {
public:
    using DataError::DataError;
};

class DomainError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class OutOfDepth : public DataError {
public:
    using DataError::DataError;
};

class ParseError : public DataError {
public:
    ParseError(const std::string& what, std::size_t row)
        : DataError("row " + std::to_string(row) + ": " + what), row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class NotLieElement : public NumericalError {
public:
    NotLieElement(const std::string& what, double residual)
        : NumericalError(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class CapabilityError : public DataError {
public:
    using DataError::DataError;
};

class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& what, std::size_t substep)
        : NumericalError(what + " (substep " + std::to_string(substep) + ")"),
          substep_(substep) {}

    std::size_t substep() const noexcept { return substep_; }

private:
    std::size_t substep_;
};

class SolverError : public NumericalError {
public:
    SolverError(const std::string& what, double residual)
        : NumericalError(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class DegenerateReport : public DataError {
public:
    using DataError::DataError;
};

} // namespace sigtools

#endif // SIGTOOLS_ERRORS_HPP
