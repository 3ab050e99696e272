#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stlshield {

/// Bad user input: malformed files, undeclared identifiers, bad options.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A query outside the domain an object is defined on (e.g. time past a horizon).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// NaN or infinity produced where a finite number was required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t position)
      : InputError(what + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

}  // namespace stlshield
