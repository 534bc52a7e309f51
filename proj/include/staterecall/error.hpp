#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace staterecall {

enum class ErrorCode {
  // catalog ingestion
  MissingColumn,
  DuplicateIdentity,
  NonNumericTarget,
  EmptyCatalog,
  MalformedCsv,
  // generation
  UnknownVariable,
  UnknownParticle,
  SelfCollision,
  CatalogTooSmall,
  PoolExhausted,
  DegenerateNoUndo,
  InsufficientVariables,
  InvalidArgument,
  // metrics
  MixedFamilies,
  DuplicateInstance,
  ZeroTotal,
  // runner
  InvalidGrid,
  ConfigMismatch,
  MalformedRecord,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. Callers branch on code(); what() carries detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace staterecall
