#pragma once

#include <stdexcept>
#include <string>

namespace rulepref {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition or invariant of an operation was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Input data (CSV, JSON, instance payloads) is malformed or inconsistent.
class DataError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// A reference ranking admits no compatible additive model.
class InfeasibleError : public Error {
 public:
  InfeasibleError() : Error("no compatible additive model") {}
  explicit InfeasibleError(const std::string& what) : Error(what) {}
};

// Numerical failure (divergent training, degenerate polytope chord, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace rulepref
