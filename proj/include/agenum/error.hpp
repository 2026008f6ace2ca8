#pragma once

#include <stdexcept>
#include <string>

namespace agenum {

enum class ErrorCode {
  kSyntax,
  kUndeclaredSymbol,
  kDuplicateStart,
  kUnitCycle,
  kEmptyInput,
  kSizeLimit,
  kNotProfiledDeterministic,
  kNoRun,
  kStepBudget,
  kInvalidRefWord,
  kMalformedOutput,
  kNotBinary,
  kScaleLimit,
  kInvalidArgument,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace agenum
