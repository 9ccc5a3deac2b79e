#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace randquad {

enum class ErrorCode {
  PrefixTooShort,
  NonEscaping,
  NotPerturbation,
  TreeTooDeep,
  AtomAtOrigin,
  InsufficientCounts,
  DegenerateCloud,
  SandwichViolation,
  InsideMandelbrot,
  ConfigError,
  IoError,
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::PrefixTooShort: return "PrefixTooShort";
    case ErrorCode::NonEscaping: return "NonEscaping";
    case ErrorCode::NotPerturbation: return "NotPerturbation";
    case ErrorCode::TreeTooDeep: return "TreeTooDeep";
    case ErrorCode::AtomAtOrigin: return "AtomAtOrigin";
    case ErrorCode::InsufficientCounts: return "InsufficientCounts";
    case ErrorCode::DegenerateCloud: return "DegenerateCloud";
    case ErrorCode::SandwichViolation: return "SandwichViolation";
    case ErrorCode::InsideMandelbrot: return "InsideMandelbrot";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// Every failure that the operations document as an error is reported through
// this type; the code is what callers (and the CLI exit status) dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace randquad
