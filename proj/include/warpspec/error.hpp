#pragma once

#include <stdexcept>
#include <string>

namespace warpspec {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Query outside the domain of a profile, end or operator.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A profile could not be evaluated (e.g. a sampled interpolant went non-positive).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Constants or parameters outside their admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Radial window unusable for the requested check.
class WindowError : public Error {
 public:
  using Error::Error;
};

/// ODE integration or quadrature failed to converge.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// A decay fit was too poor to report a rate.
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// Candidate refinement found no interior minimum.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration, unknown key or bad CLI input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace warpspec
