#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace crownkit {

enum class ErrorCode {
  DegeneratePolygon,
  OutsideRaster,
  EmptyMask,
  EmptyInput,
  InvalidArgument,
  NoOverlap,
  AllNodata,
  CenterOutOfBounds,
  EmptyCrownList,
  InsufficientSamples,
  NonPositiveValue,
  ZeroVariance,
  UnknownClass,
  LengthMismatch,
  IndexOutOfRange,
  DomainError,
  NonFinite,
  InvalidDistribution,
  MissingHistory,
  NonPositiveLoss,
  ZeroCount,
  InvalidBeta,
  DimensionMismatch,
  ZeroNormConflict,
  ShapeMismatch,
  InvalidHeads,
  InvalidDim,
  SpecInvalid,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace crownkit
