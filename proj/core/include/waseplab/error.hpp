#pragma once

#include <stdexcept>
#include <string>

namespace waseplab {

/// Raised when an operation is called outside its documented domain
/// (oversize lattice, scale violation, unstable time step, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation detects a broken internal invariant, e.g. a
/// probability vector drifting below the clipping threshold.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw PreconditionError(what);
}

}  // namespace waseplab
