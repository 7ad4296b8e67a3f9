#pragma once

#include <stdexcept>
#include <string>

namespace wle {

enum class ErrorCode {
  InvalidArgument,
  SpecArityMismatch,
  AlreadyReturned,
  BadArity,
  NondeterministicSpec,
  NoFreezePoint,
  PotentialDrop,
  SwmrRequired,
  DepthExhausted,
  SoloOutputViolated,
  NonPositiveInput,
  SearchBudgetExceeded,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SpecArityMismatch: return "SpecArityMismatch";
    case ErrorCode::AlreadyReturned: return "AlreadyReturned";
    case ErrorCode::BadArity: return "BadArity";
    case ErrorCode::NondeterministicSpec: return "NondeterministicSpec";
    case ErrorCode::NoFreezePoint: return "NoFreezePoint";
    case ErrorCode::PotentialDrop: return "PotentialDrop";
    case ErrorCode::SwmrRequired: return "SwmrRequired";
    case ErrorCode::DepthExhausted: return "DepthExhausted";
    case ErrorCode::SoloOutputViolated: return "SoloOutputViolated";
    case ErrorCode::NonPositiveInput: return "NonPositiveInput";
    case ErrorCode::SearchBudgetExceeded: return "SearchBudgetExceeded";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wle
