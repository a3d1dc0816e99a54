#pragma once

#include <stdexcept>
#include <string>

namespace enose {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed files, wrong dimensions, invalid configuration.
class InputError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public InputError {
 public:
  using InputError::InputError;
};

class RangeError : public InputError {
 public:
  using InputError::InputError;
};

class DuplicateSessionId : public InputError {
 public:
  using InputError::InputError;
};

class EmptyCorpus : public InputError {
 public:
  using InputError::InputError;
};

class DimensionMismatch : public InputError {
 public:
  using InputError::InputError;
};

class LengthMismatch : public InputError {
 public:
  using InputError::InputError;
};

class UnknownLabel : public InputError {
 public:
  using InputError::InputError;
};

class TooFewSessions : public InputError {
 public:
  using InputError::InputError;
};

class InvalidConfig : public InputError {
 public:
  using InputError::InputError;
};

class InvalidHyperparameter : public InputError {
 public:
  using InputError::InputError;
};

// The data cannot support the requested fit.
class FitError : public Error {
 public:
  using Error::Error;
};

class DegenerateData : public FitError {
 public:
  using FitError::FitError;
};

class SingularScatter : public FitError {
 public:
  using FitError::FitError;
};

class BetweenScatterZero : public FitError {
 public:
  using FitError::FitError;
};

class SingleClassData : public FitError {
 public:
  using FitError::FitError;
};

class InsufficientClasses : public FitError {
 public:
  using FitError::FitError;
};

// Stored or composed models that cannot be used.
class ModelError : public Error {
 public:
  using Error::Error;
};

class VersionMismatch : public ModelError {
 public:
  using ModelError::ModelError;
};

class CorruptModel : public ModelError {
 public:
  using ModelError::ModelError;
};

class MissingBranch : public ModelError {
 public:
  using ModelError::ModelError;
};

/// A checked invariant failed at runtime (e.g. fold leakage).
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace enose
