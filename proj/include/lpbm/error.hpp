#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lpbm {

enum class ErrorCode {
    InvalidInput,
    NotSymmetric,
    Unbounded,
    DegenerateVertex,
    NotSimple,
    NormalSetMismatch,
    NeighborhoodNotFound,
    BadParameter,
    EmptyFacet,
    NearParallelFacets,
    EigenFailure,
    TooManyEvents,
    GenerationFailed,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::NotSymmetric: return "NotSymmetric";
        case ErrorCode::Unbounded: return "Unbounded";
        case ErrorCode::DegenerateVertex: return "DegenerateVertex";
        case ErrorCode::NotSimple: return "NotSimple";
        case ErrorCode::NormalSetMismatch: return "NormalSetMismatch";
        case ErrorCode::NeighborhoodNotFound: return "NeighborhoodNotFound";
        case ErrorCode::BadParameter: return "BadParameter";
        case ErrorCode::EmptyFacet: return "EmptyFacet";
        case ErrorCode::NearParallelFacets: return "NearParallelFacets";
        case ErrorCode::EigenFailure: return "EigenFailure";
        case ErrorCode::TooManyEvents: return "TooManyEvents";
        case ErrorCode::GenerationFailed: return "GenerationFailed";
    }
    return "Unknown";
}

/// Exception carrying a machine-readable code. The message is prefixed with
/// the code name so that `what()` alone is a usable diagnostic.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

}  // namespace lpbm
