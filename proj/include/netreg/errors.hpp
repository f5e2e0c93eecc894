#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace netreg {

// Bad shapes, invalid parameters, malformed files.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Singular systems, failed factorizations, degenerate objectives.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what,
                          double condition_number = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(what), condition_number_(condition_number) {}

  double condition_number() const noexcept { return condition_number_; }

 private:
  double condition_number_;
};

}  // namespace netreg
