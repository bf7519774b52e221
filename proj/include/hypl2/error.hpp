#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hypl2 {

enum class ErrorCode {
  NotSquare,
  OddDimension,
  NotSymplectic,
  NotInvertible,
  ToleranceConflict,
  NotUnitModulus,
  DegreeOutOfRange,
  NotPositiveDefinite,
  OutOfRange,
  DimensionMismatch,
  DegenerateWindow,
  Indeterminate,
  SplitHypothesisUnverified,
  TailNotIntegrable,
  WeightEnvelopeViolated,
  GridTooCoarse,
  EmptyEndList,
  BoundaryHit,
  Reducible,
  NoReturnWithinBudget,
  AllZeroEvaluations,
  UnresolvedStrata,
  GenericityFailure,
  PreconditionNotAttested,
  SupportTouchesOrigin,
  ZeroWavenumber,
  InvalidArgument,
  SchemaError,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::OddDimension: return "OddDimension";
    case ErrorCode::NotSymplectic: return "NotSymplectic";
    case ErrorCode::NotInvertible: return "NotInvertible";
    case ErrorCode::ToleranceConflict: return "ToleranceConflict";
    case ErrorCode::NotUnitModulus: return "NotUnitModulus";
    case ErrorCode::DegreeOutOfRange: return "DegreeOutOfRange";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateWindow: return "DegenerateWindow";
    case ErrorCode::Indeterminate: return "Indeterminate";
    case ErrorCode::SplitHypothesisUnverified: return "SplitHypothesisUnverified";
    case ErrorCode::TailNotIntegrable: return "TailNotIntegrable";
    case ErrorCode::WeightEnvelopeViolated: return "WeightEnvelopeViolated";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::EmptyEndList: return "EmptyEndList";
    case ErrorCode::BoundaryHit: return "BoundaryHit";
    case ErrorCode::Reducible: return "Reducible";
    case ErrorCode::NoReturnWithinBudget: return "NoReturnWithinBudget";
    case ErrorCode::AllZeroEvaluations: return "AllZeroEvaluations";
    case ErrorCode::UnresolvedStrata: return "UnresolvedStrata";
    case ErrorCode::GenericityFailure: return "GenericityFailure";
    case ErrorCode::PreconditionNotAttested: return "PreconditionNotAttested";
    case ErrorCode::SupportTouchesOrigin: return "SupportTouchesOrigin";
    case ErrorCode::ZeroWavenumber: return "ZeroWavenumber";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure in the library is reported through this exception; the code
/// is what callers (and the CLI) dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace hypl2
