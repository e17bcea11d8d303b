#pragma once

#include <stdexcept>
#include <string>

namespace lmrt {

/// Bad parameter or precondition violation (CLI maps these to exit 1).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sarrt schedules have no attachment window.
class WindowlessSchedule : public InvalidArgument {
 public:
  WindowlessSchedule() : InvalidArgument("windowless schedule") {}
};

/// extended_fringe asked for more ancestors than the vertex has.
class TooShallow : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Numerical routine failed (non-convergence, bracketing, envelope).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lmrt
