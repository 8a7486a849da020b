#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace afcsim {

enum class ErrorCode {
  InvalidRange,
  TooManyBins,
  NegativeField,
  NonPositiveTemperature,
  DegenerateModel,
  NonPositiveInput,
  InvalidParameter,
  NonPositivePower,
  InvalidCombGeometry,
  InvalidGeometry,
  StepSizeUnderflow,
  NonFiniteState,
  SpanOutOfGrid,
  NoHoleFound,
  FitDiverged,
  NoCombDetected,
  NonPositiveSpacing,
  SingularJacobian,
  MaxIterations,
  InvalidBounds,
  InsufficientData,
  PreconditionViolated,
  ParseError,
  IoError,
  UnsupportedFormat,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::TooManyBins: return "TooManyBins";
    case ErrorCode::NegativeField: return "NegativeField";
    case ErrorCode::NonPositiveTemperature: return "NonPositiveTemperature";
    case ErrorCode::DegenerateModel: return "DegenerateModel";
    case ErrorCode::NonPositiveInput: return "NonPositiveInput";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::NonPositivePower: return "NonPositivePower";
    case ErrorCode::InvalidCombGeometry: return "InvalidCombGeometry";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::SpanOutOfGrid: return "SpanOutOfGrid";
    case ErrorCode::NoHoleFound: return "NoHoleFound";
    case ErrorCode::FitDiverged: return "FitDiverged";
    case ErrorCode::NoCombDetected: return "NoCombDetected";
    case ErrorCode::NonPositiveSpacing: return "NonPositiveSpacing";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::InvalidBounds: return "InvalidBounds";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace afcsim
