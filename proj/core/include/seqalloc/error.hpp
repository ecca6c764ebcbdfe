#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace seqalloc {

enum class ErrorCode {
  kDimensionMismatch,
  kNonFinite,
  kNotConverged,
  kInvalidRotation,
  kInterlacingViolated,
  kNegativeRadicand,
  kInvalidArgument,
  kNonPositiveDemand,
  kOversizedUser,
  kDimensionsExhausted,
  kPartitionInvalid,
  kNonUnitSequence,
};

const char* to_string(ErrorCode code);

// Every failure in the library is reported through this type. `index` carries
// the offending user, eigenvalue position or column when one exists.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(what), code_(code), index_(index) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace seqalloc
