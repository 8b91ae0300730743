#pragma once

#include <stdexcept>
#include <string>

namespace stvs {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto exit codes (validation 1, numerical 2, I/O 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class ParseError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "parse"; }
};

// Invariant violation; `path` names the offending field, e.g. "buses[3].id".
class ValidationError : public Error {
 public:
  ValidationError(std::string path, const std::string& msg)
      : Error(path + ": " + msg), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }
  const char* kind() const noexcept override { return "validation"; }

 private:
  std::string path_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numerical"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

}  // namespace stvs
