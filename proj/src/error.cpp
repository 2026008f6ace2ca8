#include "agenum/error.hpp"

namespace agenum {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSyntax: return "SyntaxError";
    case ErrorCode::kUndeclaredSymbol: return "UndeclaredSymbol";
    case ErrorCode::kDuplicateStart: return "DuplicateStart";
    case ErrorCode::kUnitCycle: return "UnitCycle";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kSizeLimit: return "SizeLimit";
    case ErrorCode::kNotProfiledDeterministic: return "NotProfiledDeterministic";
    case ErrorCode::kNoRun: return "NoRun";
    case ErrorCode::kStepBudget: return "StepBudget";
    case ErrorCode::kInvalidRefWord: return "InvalidRefWord";
    case ErrorCode::kMalformedOutput: return "MalformedOutput";
    case ErrorCode::kNotBinary: return "NotBinary";
    case ErrorCode::kScaleLimit: return "ScaleLimit";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

}  // namespace agenum
