#pragma once

#include <stdexcept>
#include <string>

namespace daonmf {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values, or negative values where a nonnegative matrix is required.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class DimError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

// Infeasible solver or experiment settings (rank too large, k > N, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A HALS column update whose divisor column has squared norm below epsilon.
class DegenerateColumn : public Error {
 public:
  DegenerateColumn(const std::string& what, std::size_t column)
      : Error(what), column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

// Malformed or unreadable files: matrix text, PGM images, label files.
class InvalidData : public Error {
 public:
  using Error::Error;
};

// Mismatched label vectors handed to the evaluation metrics.
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace daonmf
