#pragma once

#include <stdexcept>
#include <string>

namespace pmctg {

enum class ErrorCode {
  kEmptyInput,
  kEmptyCorpus,
  kIo,
  kConstraintViolation,
  kUnderflow,
  kOutOfRange,
  kOovKeyword,
  kBackendUnavailable,
  kDimensionMismatch,
  kInvalidArgument,
  kTraceFull,
  kFormat,
};

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // Input-contract violations map to exit status 2, everything else to 1.
  bool is_contract_violation() const noexcept {
    switch (code_) {
      case ErrorCode::kEmptyInput:
      case ErrorCode::kConstraintViolation:
      case ErrorCode::kUnderflow:
      case ErrorCode::kOutOfRange:
      case ErrorCode::kOovKeyword:
      case ErrorCode::kInvalidArgument:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorCode code_;
};

}  // namespace pmctg
