#include "crownkit/error.hpp"

namespace crownkit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DegeneratePolygon: return "DegeneratePolygon";
    case ErrorCode::OutsideRaster: return "OutsideRaster";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NoOverlap: return "NoOverlap";
    case ErrorCode::AllNodata: return "AllNodata";
    case ErrorCode::CenterOutOfBounds: return "CenterOutOfBounds";
    case ErrorCode::EmptyCrownList: return "EmptyCrownList";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::MissingHistory: return "MissingHistory";
    case ErrorCode::NonPositiveLoss: return "NonPositiveLoss";
    case ErrorCode::ZeroCount: return "ZeroCount";
    case ErrorCode::InvalidBeta: return "InvalidBeta";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroNormConflict: return "ZeroNormConflict";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidHeads: return "InvalidHeads";
    case ErrorCode::InvalidDim: return "InvalidDim";
    case ErrorCode::SpecInvalid: return "SpecInvalid";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace crownkit
