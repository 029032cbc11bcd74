#pragma once

#include <stdexcept>
#include <string>

namespace keratix {

// Base of every error the library raises. The CLI maps IoError to exit
// code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (manifest, predictions, checkpoint, config).
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t row)
      : Error(what + " (row " + std::to_string(row) + ")"), row_(row) {}
  explicit FormatError(const std::string& what) : Error(what), row_(0) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Bad argument to an operation (non-positive size, p outside [0,1], ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A statistic that does not exist for the given data (single-class AUROC,
// zero-variance t-test, k < 2 confidence interval, ...).
class UndefinedError : public Error {
 public:
  using Error::Error;
};

// Operation requested on a payload kind it does not support.
class UnsupportedModeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage ran before the artifact it consumes was produced.
class DependencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace keratix
