#pragma once

#include <stdexcept>
#include <string>

namespace coloc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid arguments or violated preconditions.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed text/CSV input.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Frame cannot be encoded (count or field range violation).
class EncodingError : public Error {
 public:
  using Error::Error;
};

// Socket or sink failure.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or singular points inside a numeric routine.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace coloc
