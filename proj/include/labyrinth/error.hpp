#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lab {

enum class ErrorKind {
  kInvalidInput,
  kResourceLimit,
  kDegenerateSchedule,
  kIntegrity,
  kNotSpd,
  kDegenerateHessian,
  kCoverageFailure,
  kCollarCollapse,
  kBudgetExhausted,
  kMalformedFile,
};

std::string_view to_string(ErrorKind kind);

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
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kResourceLimit: return "resource-limit";
    case ErrorKind::kDegenerateSchedule: return "degenerate-schedule";
    case ErrorKind::kIntegrity: return "integrity";
    case ErrorKind::kNotSpd: return "not-spd";
    case ErrorKind::kDegenerateHessian: return "degenerate-hessian";
    case ErrorKind::kCoverageFailure: return "coverage-failure";
    case ErrorKind::kCollarCollapse: return "collar-collapse";
    case ErrorKind::kBudgetExhausted: return "budget-exhausted";
    case ErrorKind::kMalformedFile: return "malformed-file";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace lab
