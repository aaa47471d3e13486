#pragma once

#include <stdexcept>
#include <string>

namespace excision {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied values outside a documented domain.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A self-check inside a construction failed; indicates a bug, not bad input.
class InternalError : public Error {
 public:
  using Error::Error;
};

/// Requested flow time lies outside the maximal existence interval (S, T).
class FlowDomainError : public Error {
 public:
  FlowDomainError(const std::string& what, double backward, double forward)
      : Error(what), backward_time(backward), forward_time(forward) {}
  double backward_time;
  double forward_time;
};

/// Time-1 map requested at a point whose forward time is <= 1.
class ExcisedPointError : public Error {
 public:
  using Error::Error;
};

/// The lazily glued field was queried above the last level that was built.
class DepthExhausted : public Error {
 public:
  using Error::Error;
};

/// Quadrature or integration could not reach the requested tolerance.
class ToleranceFailure : public Error {
 public:
  ToleranceFailure(const std::string& what, double lower_bound)
      : Error(what), partial_lower_bound(lower_bound) {}
  double partial_lower_bound;
};

/// A finite-difference stencil point was not in the domain of the map.
class StencilError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing an artifact file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace excision
