#pragma once

#include <stdexcept>
#include <string>

namespace umblt {

/// Input violates a documented precondition. CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Certificate failure, non-contraction, iteration cap. CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace umblt
