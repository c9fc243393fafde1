#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace pelhd {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Matrix or vector sizes violate an operation's preconditions.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid or inconsistent configuration (experiment files, CLI flags).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Floating-point or factorization failure.
class NumericError : public Error {
public:
    using Error::Error;
};

/// A limit law is not defined for the requested parameters.
class RegimeError : public Error {
public:
    using Error::Error;
};

/// The PEL solver exhausted both the Newton and fixed-point budgets.
class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, Eigen::VectorXd best_pi, double residual)
        : NumericError(what), best_pi_(std::move(best_pi)), residual_(residual) {}

    const Eigen::VectorXd& best_pi() const noexcept { return best_pi_; }
    double residual() const noexcept { return residual_; }

private:
    Eigen::VectorXd best_pi_;
    double residual_;
};

}  // namespace pelhd
