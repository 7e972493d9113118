#pragma once

#include <stdexcept>
#include <string>

namespace edgebin {

// Error codes for every failure mode that callers may want to branch on.
// Diagnostics that are part of a normal return value (validate, check_target)
// do not go through exceptions.
enum class ErrorCode {
    ShapeMismatch,
    DTypeMismatch,
    UnknownAttribute,
    UnsupportedOp,
    CycleDetected,
    Io,
    CorruptManifest,
    ChecksumMismatch,
    ExecFailure,
    NonAffinePattern,
    Unreplaceable,
    EmptyDataset,
    MissingStats,
    DegenerateRange,
    UnsupportedAlpha,
    EmptyClass,
    BadRatios,
    BadMagic,
    TruncatedPixels,
    LengthMismatch,
    UnknownLabel,
    ZeroDraw,
    EmptySeries,
    InvalidArgument,
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::DTypeMismatch: return "DTypeMismatch";
        case ErrorCode::UnknownAttribute: return "UnknownAttribute";
        case ErrorCode::UnsupportedOp: return "UnsupportedOp";
        case ErrorCode::CycleDetected: return "CycleDetected";
        case ErrorCode::Io: return "Io";
        case ErrorCode::CorruptManifest: return "CorruptManifest";
        case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
        case ErrorCode::ExecFailure: return "ExecFailure";
        case ErrorCode::NonAffinePattern: return "NonAffinePattern";
        case ErrorCode::Unreplaceable: return "Unreplaceable";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::MissingStats: return "MissingStats";
        case ErrorCode::DegenerateRange: return "DegenerateRange";
        case ErrorCode::UnsupportedAlpha: return "UnsupportedAlpha";
        case ErrorCode::EmptyClass: return "EmptyClass";
        case ErrorCode::BadRatios: return "BadRatios";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::TruncatedPixels: return "TruncatedPixels";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::UnknownLabel: return "UnknownLabel";
        case ErrorCode::ZeroDraw: return "ZeroDraw";
        case ErrorCode::EmptySeries: return "EmptySeries";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Error";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace edgebin
