#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace spce {

// Base of every error the library throws. Subclasses map onto the failure
// categories callers are expected to distinguish (the CLI maps
// ConfigError/ValidationError to exit code 2, everything else to 1).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class BoundsError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

// Rank-deficient least-squares problem. `columns` are the design columns
// that fell below the conditioning threshold.
class ConditioningError : public NumericalError {
public:
    ConditioningError(const std::string& what, std::vector<std::size_t> columns)
        : NumericalError(what), columns_(std::move(columns)) {}
    const std::vector<std::size_t>& columns() const noexcept { return columns_; }

private:
    std::vector<std::size_t> columns_;
};

// Optimizer gave up. Carries the last finite iterate.
class OptimizationError : public NumericalError {
public:
    OptimizationError(const std::string& what, std::vector<double> last_iterate)
        : NumericalError(what), last_(std::move(last_iterate)) {}
    const std::vector<double>& last_iterate() const noexcept { return last_; }

private:
    std::vector<double> last_;
};

class SelectionError : public Error {
public:
    using Error::Error;
};

class BuildError : public Error {
public:
    using Error::Error;
};

}  // namespace spce
