#pragma once

#include <stdexcept>
#include <string>

namespace msmf {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The query point lies on the focal set of the manifold (no unique nearest point).
class DegenerateProjection : public Error {
 public:
  using Error::Error;
};

/// The point is not inside the tubular neighborhood of radius reach.
class OutOfTube : public Error {
 public:
  using Error::Error;
};

/// The requested oracle is not available for this manifold or dimension.
class Unsupported : public Error {
 public:
  using Error::Error;
};

/// No observation falls inside the kernel support around the query.
class EmptyNeighborhood : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or configuration.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace msmf
