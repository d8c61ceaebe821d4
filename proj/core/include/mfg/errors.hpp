#pragma once

#include <stdexcept>
#include <string>

namespace mfg {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad JSON, unknown keys, inconsistent shapes.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class PolicyExplosion : public Error {
 public:
  using Error::Error;
};

class InfeasibleAction : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class NotIrreducible : public Error {
 public:
  using Error::Error;
};

class WrongProtocol : public Error {
 public:
  using Error::Error;
};

/// An RK4 step produced an entry below -1e-6 before the projection guard.
class StepRejected : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

/// A revision event saw sum_v rho_uv / Rr > 1.
class RateBoundViolated : public Error {
 public:
  using Error::Error;
};

class AssumptionViolated : public Error {
 public:
  using Error::Error;
};

class InvalidParams : public Error {
 public:
  using Error::Error;
};

class NotMsne : public Error {
 public:
  using Error::Error;
};

}  // namespace mfg
