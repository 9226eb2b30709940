#pragma once

#include <stdexcept>
#include <string>

namespace ncs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (matrix sizes, mode counts, sequence lengths).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input violates a documented precondition (range, finiteness, structure).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Non-finite iterate, failed factorization or singular certificate.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// The SDP back-end did not return a usable optimum.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

/// No certifiable state-feedback gain exists for the requested chain.
class NotStabilizable : public Error {
 public:
  NotStabilizable(double q, const std::string& detail)
      : Error("not stabilizable at q = " + std::to_string(q) + ": " + detail), q_(q) {}

  double q() const { return q_; }

 private:
  double q_;
};

}  // namespace ncs

namespace ncs {

/// The bounded-real LMIs have no solution: the closed loop is not certifiably
/// mean-square stable with a finite H-infinity cost over the given chain(s).
class CertificationFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace ncs
