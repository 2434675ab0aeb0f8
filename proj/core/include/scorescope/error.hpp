#pragma once

#include <stdexcept>

namespace scorescope {

// Bad or unreadable input data. The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A well-formed request whose preconditions do not hold (too few samples,
// single-class labels, degenerate rates). The CLI maps this to exit code 2.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace scorescope
