#pragma once

#include <stdexcept>
#include <string>

namespace monosf {

// Error categories. The numeric values double as CLI exit codes and as the
// status codes of the C API.
enum class ErrorKind : int {
  Invalid = 1,
  Config = 2,
  Io = 3,
  Solver = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(ErrorKind::Config, msg) {}
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(ErrorKind::Io, msg) {}
};

struct SolverError : Error {
  explicit SolverError(const std::string& msg) : Error(ErrorKind::Solver, msg) {}
};

// Domain preconditions (non-positive depth, too-small image, ...).
struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& msg) : Error(ErrorKind::Invalid, msg) {}
};

}  // namespace monosf
