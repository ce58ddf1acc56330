#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stdd {

enum class ErrorKind {
  InvalidParameter,
  IndexOutOfRange,
  InterfaceNotOnGrid,
  AssumptionViolated,
  NotLinear,
  WindowTooSmall,
  SingularSystem,
  InnerDivergence,
  LinearSolveFailure,
  ConfigParse,
};

std::string_view to_string(ErrorKind kind);

// Every recoverable failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::IndexOutOfRange: return "index-out-of-range";
    case ErrorKind::InterfaceNotOnGrid: return "interface-not-on-grid";
    case ErrorKind::AssumptionViolated: return "assumption-violated";
    case ErrorKind::NotLinear: return "not-linear";
    case ErrorKind::WindowTooSmall: return "window-too-small";
    case ErrorKind::SingularSystem: return "singular-system";
    case ErrorKind::InnerDivergence: return "inner-divergence";
    case ErrorKind::LinearSolveFailure: return "linear-solve-failure";
    case ErrorKind::ConfigParse: return "config-parse-error";
  }
  return "unknown";
}

}  // namespace stdd
