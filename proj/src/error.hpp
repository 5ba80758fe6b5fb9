#pragma once

#include <stdexcept>
#include <string>

namespace hfg {

// Failure categories surfaced through the C API as status codes and by the
// CLI as distinct exit codes.
enum class ErrorKind {
  argument,
  parse,
  schema,
  validation,
  solver,
  io,
  internal,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::argument: return "argument";
    case ErrorKind::parse: return "parse";
    case ErrorKind::schema: return "schema";
    case ErrorKind::validation: return "validation";
    case ErrorKind::solver: return "solver";
    case ErrorKind::io: return "io";
    case ErrorKind::internal: return "internal";
  }
  return "unknown";
}

}  // namespace hfg
