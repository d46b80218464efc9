#pragma once

#include <stdexcept>
#include <string>

namespace nrds {

enum class ErrorCode {
    InvalidInterval,
    GridTooLarge,
    OffGridShift,
    WindowExhausted,
    InsufficientLeftWindow,
    BlowUp,
    NoGap,
    FitFailure,
    NoContraction,
    WindowTooShort,
    SmallnessViolated,
    GridMismatch,
    EmptyCloud,
    NotAbsorbing,
    TubeEscape,
    UnclassifiedOrbit,
    ConfigError,
    IoError,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::InvalidInterval: return "invalid-interval";
        case ErrorCode::GridTooLarge: return "grid-too-large";
        case ErrorCode::OffGridShift: return "off-grid-shift";
        case ErrorCode::WindowExhausted: return "window-exhausted";
        case ErrorCode::InsufficientLeftWindow: return "insufficient-left-window";
        case ErrorCode::BlowUp: return "blow-up";
        case ErrorCode::NoGap: return "no-gap";
        case ErrorCode::FitFailure: return "fit-failure";
        case ErrorCode::NoContraction: return "no-contraction";
        case ErrorCode::WindowTooShort: return "window-too-short";
        case ErrorCode::SmallnessViolated: return "smallness-violated";
        case ErrorCode::GridMismatch: return "grid-mismatch";
        case ErrorCode::EmptyCloud: return "empty-cloud";
        case ErrorCode::NotAbsorbing: return "not-absorbing";
        case ErrorCode::TubeEscape: return "tube-escape";
        case ErrorCode::UnclassifiedOrbit: return "unclassified-orbit";
        case ErrorCode::ConfigError: return "config-error";
        case ErrorCode::IoError: return "io-error";
    }
    return "unknown";
}

}  // namespace nrds
