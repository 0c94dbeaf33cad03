#pragma once

#include <stdexcept>
#include <string>

namespace dwell {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not match (non-square input, mismatched blocks, ...).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed or non-finite input data.
class InputError : public Error {
 public:
  using Error::Error;
};

/// An iterative method failed to converge or hit a singular system.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// A parameter-dependent LMI cannot be turned into SDP constraints as asked.
class EncodingError : public Error {
 public:
  using Error::Error;
};

/// Controller gains cannot be extracted (singular S at some sample point).
class ExtractionError : public Error {
 public:
  ExtractionError(const std::string& what, double where)
      : Error(what), where_(where) {}
  double where() const { return where_; }

 private:
  double where_;
};

/// A certificate was accepted that the exact test rejects. Always a bug.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// A bound search ran out of its bracket.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

}  // namespace dwell
