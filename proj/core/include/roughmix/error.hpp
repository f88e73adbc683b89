#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace roughmix {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation
/// (negative time, Hurst parameter outside (0,1), reversed interval, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Two objects cannot be combined: tensors of different shape, rough paths
/// whose time intervals do not abut.
class ComposabilityError : public Error {
public:
    using Error::Error;
};

/// A request is well-formed but cannot be served with the given
/// configuration (size caps, ill-posed fits, missing inputs).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A grid does not resolve the points an operation needs.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// Floating-point failure: non-finite state, failed factorization.
/// `index()` carries the step, interval or leading-minor index involved.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, std::size_t index)
        : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Parameter estimation failed on the supplied data.
class EstimationError : public Error {
public:
    using Error::Error;
};

}  // namespace roughmix
