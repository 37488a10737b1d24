#pragma once

#include <stdexcept>
#include <string>

namespace arw {

// Root of every error raised by the library. The CLI maps ValidationError to
// exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyShell : public Error {
 public:
  EmptyShell() : Error("lattice shell is empty") {}
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

class UnknownPolicy : public Error {
 public:
  explicit UnknownPolicy(const std::string& name) : Error("unknown sequence policy: " + name) {}
};

class AliasError : public Error {
 public:
  using Error::Error;
};

class MemoryBudgetExceeded : public Error {
 public:
  using Error::Error;
};

class QuadratureNonConvergence : public Error {
 public:
  using Error::Error;
};

class DegenerateIntegral : public Error {
 public:
  using Error::Error;
};

class Uncertified : public Error {
 public:
  Uncertified() : Error("nodal summary is not certified") {}
};

class PerturbationTooLarge : public Error {
 public:
  using Error::Error;
};

class DegreeTooSmall : public Error {
 public:
  using Error::Error;
};

class ExpansionBudgetExceeded : public Error {
 public:
  using Error::Error;
};

class IdentityFailure : public Error {
 public:
  using Error::Error;
};

class InsufficientTrials : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigParseError : public Error {
 public:
  ConfigParseError(const std::string& what, int line, int column)
      : Error(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class ValidationError : public Error {
 public:
  ValidationError(const std::string& field_path, const std::string& what)
      : Error(field_path + ": " + what), field_path_(field_path) {}
  const std::string& field_path() const { return field_path_; }

 private:
  std::string field_path_;
};

}  // namespace arw
