#pragma once

#include <stdexcept>
#include <string>

namespace vrc {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Shape mismatch, non-finite entries, violated preconditions.
class InvalidInput : public Error {
  public:
    using Error::Error;
};

/// A factorization failed even after diagonal jitter escalation.
class ConditioningError : public Error {
  public:
    using Error::Error;
};

/// A count (feature dimension, table size) exceeds representable range.
class CapacityError : public Error {
  public:
    using Error::Error;
};

/// Integrator step-size underflow or a non-finite state.
class SimulationError : public Error {
  public:
    using Error::Error;
};

/// Malformed CSV or JSON document; the message carries the location.
class ParseError : public Error {
  public:
    using Error::Error;
};

/// Experiment configuration is invalid; the message carries the field path.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// A pipeline stage could not find or trust an upstream artifact.
class DependencyError : public Error {
  public:
    using Error::Error;
};

}  // namespace vrc
