#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pnlattr {

enum class ErrorKind {
  EmptyNodes,
  NonMonotoneTenors,
  NegativeTenor,
  ParseError,
  DuplicateDate,
  MissingField,
  InvalidArgument,
  PastMaturity,
  EmptyInterval,
  EmptyPeriod,
  PricerEvaluationFailed,
  MissingSnapshot,
  ScheduleOutsideGrid,
  InvalidCorrelation,
  LengthMismatch,
  NonFiniteDerivative,
  UnknownBucket,
  DuplicatePositionId,
  EmptyResults,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptyNodes: return "EmptyNodes";
    case ErrorKind::NonMonotoneTenors: return "NonMonotoneTenors";
    case ErrorKind::NegativeTenor: return "NegativeTenor";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DuplicateDate: return "DuplicateDate";
    case ErrorKind::MissingField: return "MissingField";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::PastMaturity: return "PastMaturity";
    case ErrorKind::EmptyInterval: return "EmptyInterval";
    case ErrorKind::EmptyPeriod: return "EmptyPeriod";
    case ErrorKind::PricerEvaluationFailed: return "PricerEvaluationFailed";
    case ErrorKind::MissingSnapshot: return "MissingSnapshot";
    case ErrorKind::ScheduleOutsideGrid: return "ScheduleOutsideGrid";
    case ErrorKind::InvalidCorrelation: return "InvalidCorrelation";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::NonFiniteDerivative: return "NonFiniteDerivative";
    case ErrorKind::UnknownBucket: return "UnknownBucket";
    case ErrorKind::DuplicatePositionId: return "DuplicatePositionId";
    case ErrorKind::EmptyResults: return "EmptyResults";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable kind next
/// to the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), message_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace pnlattr
