#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dtfa {

enum class ErrorKind {
  invalid_argument,
  invalid_phase,
  degenerate_envelope,
  non_uniform_grid,
  io,
  parse,
  config,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::invalid_phase: return "invalid-phase";
    case ErrorKind::degenerate_envelope: return "degenerate-envelope";
    case ErrorKind::non_uniform_grid: return "non-uniform-grid";
    case ErrorKind::io: return "io";
    case ErrorKind::parse: return "parse";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

/// All library failures are reported through this exception; `kind()` is
/// stable and meant for programmatic dispatch, `what()` for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace dtfa
