#pragma once

#include <stdexcept>
#include <string>

namespace roughlab {

/// Bad input: violated precondition, mismatched grids, out-of-range parameter.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input is valid but larger than an exhaustive or dense routine accepts.
class RefusalError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Factorization failure, non-finite state, or similar breakdown.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool ok, const std::string& what) {
  if (!ok) throw ArgumentError(what);
}
}  // namespace detail

}  // namespace roughlab
