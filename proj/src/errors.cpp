#include "salev/errors.hpp"

namespace salev {

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ModalityMismatch: return "ModalityMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::NoGradientCapability: return "NoGradientCapability";
    case ErrorCode::NoRepresentationCapability: return "NoRepresentationCapability";
    case ErrorCode::NoActivationCapability: return "NoActivationCapability";
    case ErrorCode::KernelTooLarge: return "KernelTooLarge";
    case ErrorCode::SingularFit: return "SingularFit";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::InvalidLayer: return "InvalidLayer";
    case ErrorCode::Divergence: return "Divergence";
    case ErrorCode::TooManySegments: return "TooManySegments";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::NoKeptNeighbors: return "NoKeptNeighbors";
    case ErrorCode::WrongModality: return "WrongModality";
    case ErrorCode::DegenerateCurve: return "DegenerateCurve";
    case ErrorCode::BatchTooSmall: return "BatchTooSmall";
    case ErrorCode::DegenerateGroups: return "DegenerateGroups";
    case ErrorCode::AllTied: return "AllTied";
    case ErrorCode::IncompleteCube: return "IncompleteCube";
    case ErrorCode::AllMissing: return "AllMissing";
    case ErrorCode::MethodUniverseEmpty: return "MethodUniverseEmpty";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::MissingStageInput: return "MissingStageInput";
    case ErrorCode::ConfigHashMismatch: return "ConfigHashMismatch";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

} // namespace salev
