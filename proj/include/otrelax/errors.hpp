#pragma once

#include <stdexcept>
#include <string>

namespace otrelax {

// Bad input: malformed measures, inconsistent dimensions, unsupported cost pairs.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A solver failed to converge or hit a tolerance it could not honour.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace otrelax
