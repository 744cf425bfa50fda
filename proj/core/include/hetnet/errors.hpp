#pragma once

#include <stdexcept>
#include <string>

namespace hetnet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Thrown when a nullspace is requested of a matrix with full column rank.
class EmptyNullspace : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class SingularCorrelation : public Error {
 public:
  using Error::Error;
};

class GeometryInfeasible : public Error {
 public:
  using Error::Error;
};

class NonpositiveDistance : public Error {
 public:
  using Error::Error;
};

class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

/// The requested antenna/stream profile cannot support two-stage alignment.
class TsiaInfeasible : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hetnet
