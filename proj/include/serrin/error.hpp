#pragma once

#include <stdexcept>
#include <string>

namespace serrin {

/// Base class for every failure raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the inputs of an operation does not hold.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Meshing could not produce a usable triangulation.
class MeshError : public Error {
 public:
  using Error::Error;
};

/// The linear solver did not reach its tolerance.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// A closed-form function was evaluated outside the set where it is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace serrin
