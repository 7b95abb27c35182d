#pragma once

#include <stdexcept>
#include <string>

namespace wot {

enum class ErrorCode {
  argument = 1,
  config = 2,
  numerical = 3,
  infeasible = 4,
  io = 5,
  growth = 6,
};

// Base for every error raised by the library. The code maps one-to-one onto
// the C API status values and the CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what) : Error(ErrorCode::argument, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::config, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorCode::numerical, what) {}
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what) : Error(ErrorCode::infeasible, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::io, what) {}
};

// The payoff does not satisfy the growth bound required by the cost, so the
// transform may be unbounded.
class GrowthError : public Error {
 public:
  explicit GrowthError(const std::string& what) : Error(ErrorCode::growth, what) {}
};

}  // namespace wot
