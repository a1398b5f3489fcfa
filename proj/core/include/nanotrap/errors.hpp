#pragma once

#include <stdexcept>
#include <string>

namespace nanotrap {

// A physics precondition was violated (negative distance, red detuning,
// pole of a field expression, no trap where one is required).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Query outside the tabulated range of some data set.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nanotrap
