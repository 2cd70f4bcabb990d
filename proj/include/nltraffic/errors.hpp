#pragma once

#include <stdexcept>
#include <string>

namespace nltraffic {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// Malformed input: bad topology, bad scenario field, bad block placement.
class ValidationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "validation"; }
};

/// A modelling assumption is broken (e.g. interaction radius >= L_0).
class ConstraintError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "constraint"; }
};

class RangeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "range"; }
};

/// Two fields or grids that must match do not.
class ShapeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "shape"; }
};

/// Explicit step would violate the CFL bound.
class CflError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "cfl"; }
};

/// Numerical failure during a solve (non-finite values, missing history).
class SolverError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "solver"; }
};

/// Requested operation is outside the supported topology class.
class UnsupportedError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "unsupported"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

}  // namespace nltraffic
