#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace protobooth {

enum class ErrorCode {
  kValidation,       // record violates its invariants; violations() lists them
  kUnknownCategory,  // coding label not in scheme
  kUnknownScheme,
  kNotFound,         // unknown capture / user / project id
  kConflict,         // card already bound to another user, final-concept clash
  kChronology,       // edge must point forward in time
  kHashMismatch,     // payload does not match manifest
  kStorage,          // retriable storage fault
  kBadRequest,
  kUnsupportedFormat,
};

std::string_view to_string(ErrorCode code);

/// Domain error carrying a machine-readable code and, for validation
/// failures, the full list of violated invariants.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message,
        std::vector<std::string> violations = {})
      : std::runtime_error(std::move(message)),
        code_(code),
        violations_(std::move(violations)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& violations() const noexcept {
    return violations_;
  }
  bool retriable() const noexcept { return code_ == ErrorCode::kStorage; }

 private:
  ErrorCode code_;
  std::vector<std::string> violations_;
};

}  // namespace protobooth
