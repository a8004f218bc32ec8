#pragma once

#include <stdexcept>
#include <string>

namespace chfe {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A curvature profile is non-positive, non-finite, or violates its declared monotonicity.
class InvalidProfile : public Error {
public:
    using Error::Error;
};

/// The adaptive integrator could not reach the requested tolerance.
class IntegratorFailure : public Error {
public:
    using Error::Error;
};

/// An operation was called outside its documented domain.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A model parameter (q, lambda, dimension, ...) is out of range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// The operation needs exact volumes or distances that the manifold does not provide.
class UnsupportedManifold : public Error {
public:
    using Error::Error;
};

/// A configuration or data file is malformed.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// The interaction potential fails the growth test required for a ground state.
class GrowthConditionError : public Error {
public:
    using Error::Error;
};

} // namespace chfe
