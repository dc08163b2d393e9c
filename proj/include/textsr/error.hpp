#pragma once

#include <stdexcept>
#include <string>

namespace textsr {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor/image dimensions do not satisfy an operation's contract.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A NaN/Inf appeared where only finite values are allowed.
class NumericError : public Error {
 public:
  using Error::Error;
};

// An argument is outside its documented range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A pluggable provider (text encoder, detector, scorer, recognizer...) failed.
class ProviderError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed configuration or sidecar input.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace textsr
