#pragma once

#include <stdexcept>
#include <string>

namespace nsp {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: wrong sizes, bad indices, invalid parameters.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The iteration produced non-finite values or blew past the divergence cap.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t iteration)
      : Error(what), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

// A reference saddle point failed its KKT certificate.
class CertificationError : public Error {
 public:
  using Error::Error;
};

// Lambda calibration could not bracket the requested residual.
class BracketError : public Error {
 public:
  BracketError(const std::string& what, double lo_residual, double hi_residual)
      : Error(what), lo_residual_(lo_residual), hi_residual_(hi_residual) {}
  double lo_residual() const noexcept { return lo_residual_; }
  double hi_residual() const noexcept { return hi_residual_; }

 private:
  double lo_residual_;
  double hi_residual_;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Throws InvalidArgument("<what>: expected <expected>, got <actual>") when sizes differ.
void check_size(const char* what, std::size_t expected, std::size_t actual);

}  // namespace nsp
