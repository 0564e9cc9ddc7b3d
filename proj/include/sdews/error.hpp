#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sdews {

enum class ErrorCode {
    // ctmc
    NonSquare,
    NegativeOffDiagonal,
    RowSumNonzero,
    IndexOutOfRange,
    AbsorbingState,
    TimeOutOfRange,
    // noise
    NegativeTime,
    ReversedInterval,
    // models / stepping
    InvalidParams,
    NonpositiveRemainingTime,
    // schemes
    NonfiniteResult,
    RootNotFound,
    StepBudgetExceeded,
    // harness
    DegenerateGrid,
    AllTrajectoriesFailed,
    // cli
    ParseError,
    ValidationError,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonSquare: return "NonSquare";
        case ErrorCode::NegativeOffDiagonal: return "NegativeOffDiagonal";
        case ErrorCode::RowSumNonzero: return "RowSumNonzero";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::AbsorbingState: return "AbsorbingState";
        case ErrorCode::TimeOutOfRange: return "TimeOutOfRange";
        case ErrorCode::NegativeTime: return "NegativeTime";
        case ErrorCode::ReversedInterval: return "ReversedInterval";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::NonpositiveRemainingTime: return "NonpositiveRemainingTime";
        case ErrorCode::NonfiniteResult: return "NonfiniteResult";
        case ErrorCode::RootNotFound: return "RootNotFound";
        case ErrorCode::StepBudgetExceeded: return "StepBudgetExceeded";
        case ErrorCode::DegenerateGrid: return "DegenerateGrid";
        case ErrorCode::AllTrajectoriesFailed: return "AllTrajectoriesFailed";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Single exception type for the library; `code()` identifies the failure.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// True for failures that end a single trajectory but not an ensemble.
constexpr bool is_trajectory_failure(ErrorCode code) noexcept {
    return code == ErrorCode::NonfiniteResult || code == ErrorCode::RootNotFound ||
           code == ErrorCode::StepBudgetExceeded;
}

}  // namespace sdews
