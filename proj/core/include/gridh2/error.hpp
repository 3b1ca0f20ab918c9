#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridh2 {

/// Failure categories surfaced by the library. The CLI maps each one to a
/// fixed process exit code.
enum class ErrorCode {
  kInvalidInput,
  kDisconnectedNetwork,
  kNotHurwitz,
  kNumericalFailure,
  kNonZeroFirstEigenvalue,
  kUnstableStep,
  kInsufficientSamples,
  kInfeasible,
  kTooLarge,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gridh2
