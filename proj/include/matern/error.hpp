#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace matern {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Result not representable as a finite double.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// Iterative or bracketing numerics failed to produce a result.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Invalid user configuration (CLI configs, design specs).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Every optimizer start failed.
class EstimationError : public Error {
public:
    using Error::Error;
};

/// Cholesky met a non-positive pivot. `pivot()` is the zero-based column.
class NotPositiveDefinite : public Error {
public:
    NotPositiveDefinite(std::size_t pivot, const std::string& what)
        : Error(what), pivot_(pivot) {}

    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

}  // namespace matern
