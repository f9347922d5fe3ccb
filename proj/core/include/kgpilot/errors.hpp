#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kgpilot {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A container size does not match the particle count it is used with.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A parameter is outside its documented domain (non-positive mass,
/// resolution below the minimum, rapidity not finite, ...).
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

/// The wave function modulus fell to or below the node threshold, so the
/// phase gradient (and velocity) is undefined. Carries the configuration at
/// which the evaluation was attempted, flattened as t,x,y,z per particle.
class NodeError : public Error {
 public:
  NodeError(std::vector<double> coords, double psi_modulus, double threshold);

  const std::vector<double>& configuration_coords() const noexcept { return coords_; }
  double psi_modulus() const noexcept { return psi_modulus_; }
  double threshold() const noexcept { return threshold_; }

 private:
  std::vector<double> coords_;
  double psi_modulus_;
  double threshold_;
};

/// A packet whose norm over the requested box vanishes (or is not positive).
class DegeneratePacketError : public Error {
 public:
  using Error::Error;
};

/// A conditional density was requested with a non-positive normalization.
class DegenerateConditionError : public Error {
 public:
  using Error::Error;
};

/// Rejection sampling made essentially no progress against its envelope.
class PathologicalEnvelopeError : public Error {
 public:
  using Error::Error;
};

/// A non-finite state was produced during numerical integration.
class NumericalBlowupError : public Error {
 public:
  using Error::Error;
};

/// The operation is defined but not supported for this input shape.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// A statistical check could not reach a verdict (e.g. too few survivors).
class InconclusiveError : public Error {
 public:
  using Error::Error;
};

/// A definition file could not be parsed. Carries the offending field name
/// (JSON pointer style) and, when known, the 1-based line number.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message, std::string field = {}, int line = -1);

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

}  // namespace kgpilot
