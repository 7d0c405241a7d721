#pragma once

#include <stdexcept>
#include <string>

namespace saddle {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Out-of-range or inconsistent construction parameters.
class InvalidParameters : public Error {
 public:
  using Error::Error;
};

// An operation was called on an object that does not meet its requirements.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// The stationarity system of a problem is singular.
class NoUniqueSolution : public Error {
 public:
  using Error::Error;
};

// The problem kind does not provide the requested oracle.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// A construction that must never ship failed its own certification.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace saddle
