#pragma once

#include <stdexcept>
#include <string>

namespace gasketflow {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid arguments: mismatched graphs, bad weights, incompatible data.
class DomainError : public Error {
public:
    using Error::Error;
};

// Requested object would not fit in memory or overflow integer labels.
class ResourceError : public Error {
public:
    using Error::Error;
};

// Operation requires a property (typically convexity) the input lacks.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

// Iterative solver stopped before reaching its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual, int iterations)
        : Error(what), residual_(residual), iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double residual_;
    int iterations_;
};

}  // namespace gasketflow
