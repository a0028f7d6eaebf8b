#pragma once

#include <stdexcept>
#include <string>

namespace motrack {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input data (files, rows, values).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition (bad parameter, out-of-order
/// frame, dimension mismatch, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace motrack
