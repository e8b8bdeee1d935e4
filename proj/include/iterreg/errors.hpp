#pragma once

#include <stdexcept>
#include <string>

namespace iterreg {

// Sizes of points, coefficient vectors or labels disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A parameter lies outside the range an operation accepts.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Step size parameters violate the admissibility bound and were not forced.
class InadmissibleSchedule : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The iteration produced non-finite values or outgrew the iterate norm bound.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace iterreg
