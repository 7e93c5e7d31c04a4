#pragma once

#include <stdexcept>
#include <string>

namespace jams {

// Stable error categories; values double as process exit codes at the C
// boundary and in the CLI.
enum class ErrorCode : int {
  Ok = 0,
  Config = 2,   // invalid configuration / input files
  Numeric = 3,  // unrecoverable numerical failure
  Partial = 4,  // some replications failed, others completed
  Io = 5,       // filesystem failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct NotPositiveDefinite : Error {
  explicit NotPositiveDefinite(const std::string& what) : Error(ErrorCode::Numeric, what) {}
};

struct NonFiniteValue : Error {
  explicit NonFiniteValue(const std::string& what) : Error(ErrorCode::Numeric, what) {}
};

struct EmptyCandidates : Error {
  explicit EmptyCandidates(const std::string& what) : Error(ErrorCode::Numeric, what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorCode::Config, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorCode::Io, what) {}
};

}  // namespace jams
