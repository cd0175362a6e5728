#pragma once

#include <stdexcept>
#include <string>

namespace geocert {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Wrong matrix shape or a symmetric input that is not symmetric.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Input lies outside the domain of a numeric function (e.g. log of a
/// non-positive eigenvalue).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Parameter outside its admissible range (e.g. geodesic t outside [0, 1]).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A variable was redeclared with a different manifold.
class DeclarationConflict : public Error {
 public:
  using Error::Error;
};

/// An atom id was registered twice.
class RegistrationConflict : public Error {
 public:
  using Error::Error;
};

/// apply_atom was given an unknown atom or arguments that do not match the
/// atom signature (count, kind or dimension).
class SignatureError : public Error {
 public:
  using Error::Error;
};

/// A constant failed its claimed definiteness / rank requirements.
class InvalidConstant : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared during a numeric computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (e.g. zero fuzz trials).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The fuzzer skipped more than half of its trials.
class InconclusiveError : public Error {
 public:
  using Error::Error;
};

}  // namespace geocert
