#include "msport/error.hpp"

namespace msport {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::MissingValue: return "MissingValue";
        case ErrorCode::NonPositivePrice: return "NonPositivePrice";
        case ErrorCode::DuplicateDate: return "DuplicateDate";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::ScaleTooLarge: return "ScaleTooLarge";
        case ErrorCode::BadPhase: return "BadPhase";
        case ErrorCode::UniverseMismatch: return "UniverseMismatch";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::PanelTooShort: return "PanelTooShort";
        case ErrorCode::SeriesTooShort: return "SeriesTooShort";
        case ErrorCode::BadLength: return "BadLength";
        case ErrorCode::BadSchedule: return "BadSchedule";
        case ErrorCode::BadDepth: return "BadDepth";
        case ErrorCode::NotPSD: return "NotPSD";
        case ErrorCode::ZeroMoment: return "ZeroMoment";
        case ErrorCode::NonPositiveMoment: return "NonPositiveMoment";
        case ErrorCode::TooFewPoints: return "TooFewPoints";
        case ErrorCode::DegenerateSegments: return "DegenerateSegments";
        case ErrorCode::ZeroVolatility: return "ZeroVolatility";
        case ErrorCode::NoPositiveExcessReturn: return "NoPositiveExcessReturn";
        case ErrorCode::SingularCovariance: return "SingularCovariance";
        case ErrorCode::MaxIterations: return "MaxIterations";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::EmbeddingFailure: return "EmbeddingFailure";
        case ErrorCode::CalibrationFailure: return "CalibrationFailure";
        case ErrorCode::SolverFailure: return "SolverFailure";
    }
    return "Unknown";
}

ErrorCategory error_category(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument:
            return ErrorCategory::Usage;
        case ErrorCode::SingularCovariance:
        case ErrorCode::MaxIterations:
        case ErrorCode::Infeasible:
        case ErrorCode::EmbeddingFailure:
        case ErrorCode::CalibrationFailure:
        case ErrorCode::SolverFailure:
            return ErrorCategory::Numerical;
        default:
            return ErrorCategory::Data;
    }
}

}  // namespace msport
