#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cxcurve {

/// Failure categories raised by the library. The CLI maps each one onto an
/// exit code, so new entries need a matching case in `category_of`.
enum class ErrorCode {
    InvalidArgument,
    ParseError,
    DegreeZero,
    NonConvergence,
    RootFindingFailed,
    SingularAtOrigin,
    EpsNotDivisor,
    ApertureTooWide,
    DegenerateTorsion,
    RetriesExhausted,
    SegmentHitsSingularity,
    AllSamplesZero,
    DegenerateTriple,
    EmptyRegion,
    ZeroVolume,
};

enum class ErrorCategory { Usage, Input, Numerical };

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::DegreeZero: return "DegreeZero";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::RootFindingFailed: return "RootFindingFailed";
        case ErrorCode::SingularAtOrigin: return "SingularAtOrigin";
        case ErrorCode::EpsNotDivisor: return "EpsNotDivisor";
        case ErrorCode::ApertureTooWide: return "ApertureTooWide";
        case ErrorCode::DegenerateTorsion: return "DegenerateTorsion";
        case ErrorCode::RetriesExhausted: return "RetriesExhausted";
        case ErrorCode::SegmentHitsSingularity: return "SegmentHitsSingularity";
        case ErrorCode::AllSamplesZero: return "AllSamplesZero";
        case ErrorCode::DegenerateTriple: return "DegenerateTriple";
        case ErrorCode::EmptyRegion: return "EmptyRegion";
        case ErrorCode::ZeroVolume: return "ZeroVolume";
    }
    return "Unknown";
}

constexpr ErrorCategory category_of(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return ErrorCategory::Usage;
        case ErrorCode::ParseError:
        case ErrorCode::DegenerateTorsion:
        case ErrorCode::SingularAtOrigin: return ErrorCategory::Input;
        default: return ErrorCategory::Numerical;
    }
}

class Error : public std::runtime_error {
   public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

   private:
    ErrorCode code_;
};

inline void require(bool cond, const char* what) {
    if (!cond) throw Error(ErrorCode::InvalidArgument, what);
}

}  // namespace cxcurve
