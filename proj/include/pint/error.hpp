#pragma once

#include <stdexcept>
#include <string>

namespace pint {

// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file or record could not be parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A value violated a documented invariant or precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace pint
