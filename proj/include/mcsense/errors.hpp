#pragma once

#include <stdexcept>
#include <string>

namespace mcsense {

/// Failure categories surfaced by the library. The CLI prints these names in
/// a machine-parsable "error[Name]: ..." prefix.
enum class ErrorCode {
  InvalidArgument,
  NegativeEntry,
  RowSumOutOfTolerance,
  RowSumExceedsOne,
  Reducible,
  SingularMatrix,
  SameIndex,
  NotDominated,
  DominationViolated,
  NoSlack,
  EtaTooLarge,
  ZeroSamples,
  CapExceeded,
  EigenFailure,
  NonDefaultPotential,
  ParseError,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::RowSumOutOfTolerance: return "RowSumOutOfTolerance";
    case ErrorCode::RowSumExceedsOne: return "RowSumExceedsOne";
    case ErrorCode::Reducible: return "Reducible";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::SameIndex: return "SameIndex";
    case ErrorCode::NotDominated: return "NotDominated";
    case ErrorCode::DominationViolated: return "DominationViolated";
    case ErrorCode::NoSlack: return "NoSlack";
    case ErrorCode::EtaTooLarge: return "EtaTooLarge";
    case ErrorCode::ZeroSamples: return "ZeroSamples";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::NonDefaultPotential: return "NonDefaultPotential";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  const char* code_name() const noexcept { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace mcsense
