#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace toonbench {

enum class ErrorCode {
  FileNotFound,
  DecodeError,
  ZeroDimension,
  DimensionMismatch,
  InvalidArgument,
  EmptyMask,
  EmptyForeground,
  EmptyBands,
  TooSmall,
  BothEmpty,
  AlreadySplit,
  EmptyCategory,
  TargetTooLarge,
  ManifestInvalid,
  NoPairsResolved,
  MissingPrediction,
  AmbiguousPrediction,
  EmptyReports,
  NoCandidates,
  NoComparablePairs,
  SessionNotInitialized,
  UnknownTask,
  LabelMismatch,
  DuplicateSubmission,
  UnknownHandle,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (CLI exit codes, HTTP status mapping, per-metric absent values)
/// can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace toonbench
