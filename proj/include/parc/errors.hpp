#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace parc {

// Every failure mode in the library maps to one of these codes. The CLI
// translates codes to exit statuses; tests match on them.
enum class ErrorCode {
    ZeroVector,
    DimensionMismatch,
    EmptyPool,
    SchemaError,
    IoError,
    ChecksumMismatch,
    MissingSlotValue,
    UnlabeledEntry,
    VerbalizerMiss,
    DuplicateTemplateId,
    DanglingHitId,
    TransportError,
    BackendRejection,
    Timeout,
    NoMaskMarker,
    CandidateTokenizationError,
    LengthMismatch,
    UnknownGoldLabel,
    EmptyMatrix,
    EmptyReference,
    LabelSetMismatch,
    ConstraintViolation,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptyPool: return "EmptyPool";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
        case ErrorCode::MissingSlotValue: return "MissingSlotValue";
        case ErrorCode::UnlabeledEntry: return "UnlabeledEntry";
        case ErrorCode::VerbalizerMiss: return "VerbalizerMiss";
        case ErrorCode::DuplicateTemplateId: return "DuplicateTemplateId";
        case ErrorCode::DanglingHitId: return "DanglingHitId";
        case ErrorCode::TransportError: return "TransportError";
        case ErrorCode::BackendRejection: return "BackendRejection";
        case ErrorCode::Timeout: return "Timeout";
        case ErrorCode::NoMaskMarker: return "NoMaskMarker";
        case ErrorCode::CandidateTokenizationError: return "CandidateTokenizationError";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::UnknownGoldLabel: return "UnknownGoldLabel";
        case ErrorCode::EmptyMatrix: return "EmptyMatrix";
        case ErrorCode::EmptyReference: return "EmptyReference";
        case ErrorCode::LabelSetMismatch: return "LabelSetMismatch";
        case ErrorCode::ConstraintViolation: return "ConstraintViolation";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace parc
