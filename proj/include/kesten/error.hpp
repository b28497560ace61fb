#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kesten {

enum class ErrorCode {
    InvalidParameter,
    NonnegativityRequired,
    PositivityRequired,
    DegenerateSpec,
    NumericalOverflow,
    NonFiniteValue,
    ZeroWeightSum,
    NonPositivePrice,
    InsufficientTail,
    DegenerateTail,
    DegenerateSeries,
    SeriesTooShort,
    NoPositiveRoot,
    NonStationary,
    Degenerate,
    VarianceNotFinite,
    NoDensity,
    NoSignChange,
    ParseError,
    ConfigError,
    MissingArtifacts,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidParameter: return "InvalidParameter";
        case ErrorCode::NonnegativityRequired: return "NonnegativityRequired";
        case ErrorCode::PositivityRequired: return "PositivityRequired";
        case ErrorCode::DegenerateSpec: return "DegenerateSpec";
        case ErrorCode::NumericalOverflow: return "NumericalOverflow";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::ZeroWeightSum: return "ZeroWeightSum";
        case ErrorCode::NonPositivePrice: return "NonPositivePrice";
        case ErrorCode::InsufficientTail: return "InsufficientTail";
        case ErrorCode::DegenerateTail: return "DegenerateTail";
        case ErrorCode::DegenerateSeries: return "DegenerateSeries";
        case ErrorCode::SeriesTooShort: return "SeriesTooShort";
        case ErrorCode::NoPositiveRoot: return "NoPositiveRoot";
        case ErrorCode::NonStationary: return "NonStationary";
        case ErrorCode::Degenerate: return "Degenerate";
        case ErrorCode::VarianceNotFinite: return "VarianceNotFinite";
        case ErrorCode::NoDensity: return "NoDensity";
        case ErrorCode::NoSignChange: return "NoSignChange";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::MissingArtifacts: return "MissingArtifacts";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure in the toolkit is reported as a kesten::Error carrying a code
/// that callers (notably the CLI exit-code mapping) can switch on.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

namespace detail {

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) throw Error(code, message);
}

}  // namespace detail

}  // namespace kesten
