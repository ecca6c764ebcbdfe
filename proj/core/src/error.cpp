#include "seqalloc/error.hpp"

namespace seqalloc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kNonFinite: return "non-finite value";
    case ErrorCode::kNotConverged: return "not converged";
    case ErrorCode::kInvalidRotation: return "invalid rotation";
    case ErrorCode::kInterlacingViolated: return "interlacing violated";
    case ErrorCode::kNegativeRadicand: return "negative radicand";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kNonPositiveDemand: return "non-positive demand";
    case ErrorCode::kOversizedUser: return "oversized user";
    case ErrorCode::kDimensionsExhausted: return "dimensions exhausted";
    case ErrorCode::kPartitionInvalid: return "invalid partition";
    case ErrorCode::kNonUnitSequence: return "non-unit sequence";
  }
  return "unknown";
}

}  // namespace seqalloc
