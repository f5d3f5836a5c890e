#pragma once

#include <stdexcept>
#include <string>

namespace nbf {

// Precondition and shape violations inside the library are reported as
// std::invalid_argument. The three types below carry the failure classes
// the command line tool maps onto exit codes 2, 3 and 4.

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nbf
