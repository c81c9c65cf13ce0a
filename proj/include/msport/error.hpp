#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace msport {

// Every failure raised by the library carries one of these codes. The C API
// maps them 1:1 onto msport_status values, and the CLI maps their category
// onto its exit codes.
enum class ErrorCode {
    InvalidArgument = 1,
    // input data
    IoError,
    ParseError,
    MissingValue,
    NonPositivePrice,
    DuplicateDate,
    TooShort,
    ScaleTooLarge,
    BadPhase,
    UniverseMismatch,
    DimensionMismatch,
    PanelTooShort,
    SeriesTooShort,
    BadLength,
    BadSchedule,
    BadDepth,
    NotPSD,
    // degenerate statistics
    ZeroMoment,
    NonPositiveMoment,
    TooFewPoints,
    DegenerateSegments,
    ZeroVolatility,
    NoPositiveExcessReturn,
    // numerical
    SingularCovariance,
    MaxIterations,
    Infeasible,
    EmbeddingFailure,
    CalibrationFailure,
    SolverFailure,
};

enum class ErrorCategory { Usage = 1, Data = 2, Numerical = 3 };

std::string_view error_code_name(ErrorCode code) noexcept;
ErrorCategory error_category(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace msport
