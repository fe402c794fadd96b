#pragma once

#include <stdexcept>
#include <string>

namespace vg {

// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// A documented precondition (integer r, matching theta/sigma, ...) does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Iterative method (series, quadrature, root finder, optimiser) failed to converge.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

// A fitted model collapsed (non-positive variance, lighter-than-normal tails, ...).
class FitError : public Error {
public:
    using Error::Error;
};

}  // namespace vg
