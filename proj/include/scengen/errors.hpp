#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scengen {

/// Broad failure class. Each maps onto one CLI exit code.
enum class ErrorCategory {
    Config = 2,
    Data = 3,
    Numeric = 4,
    Lineage = 5,
};

enum class ErrorCode {
    // data_model
    MissingColumn,
    NonMonotonicTimestamps,
    NonNumericCell,
    GapInHourlyGrid,
    GridNotCovering,
    AllZeroSeries,
    RangeTooShort,
    // marginals
    ShapeMismatch,
    NonFiniteLoss,
    BadKernel,
    UnsortedQuantiles,
    DegenerateSamples,
    DidNotConverge,
    OutOfSupport,
    // copula
    DomainError,
    MissingMarginal,
    ZeroVarianceRow,
    NotPositiveDefinite,
    DimensionMismatch,
    // metrics
    MissingForecast,
    NoScenarios,
    // pipeline
    ConfigError,
    InsufficientData,
    VersionMismatch,
    StaleArtifact,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::NonMonotonicTimestamps: return "NonMonotonicTimestamps";
        case ErrorCode::NonNumericCell: return "NonNumericCell";
        case ErrorCode::GapInHourlyGrid: return "GapInHourlyGrid";
        case ErrorCode::GridNotCovering: return "GridNotCovering";
        case ErrorCode::AllZeroSeries: return "AllZeroSeries";
        case ErrorCode::RangeTooShort: return "RangeTooShort";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::BadKernel: return "BadKernel";
        case ErrorCode::UnsortedQuantiles: return "UnsortedQuantiles";
        case ErrorCode::DegenerateSamples: return "DegenerateSamples";
        case ErrorCode::DidNotConverge: return "DidNotConverge";
        case ErrorCode::OutOfSupport: return "OutOfSupport";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::MissingMarginal: return "MissingMarginal";
        case ErrorCode::ZeroVarianceRow: return "ZeroVarianceRow";
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::MissingForecast: return "MissingForecast";
        case ErrorCode::NoScenarios: return "NoScenarios";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::StaleArtifact: return "StaleArtifact";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

constexpr ErrorCategory category_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::ConfigError:
            return ErrorCategory::Config;
        case ErrorCode::NonFiniteLoss:
        case ErrorCode::NotPositiveDefinite:
        case ErrorCode::DidNotConverge:
            return ErrorCategory::Numeric;
        case ErrorCode::VersionMismatch:
        case ErrorCode::StaleArtifact:
            return ErrorCategory::Lineage;
        default:
            return ErrorCategory::Data;
    }
}

/// The single exception type thrown by the library. `code()` identifies the
/// failure; the message names the offending row, column, cell or key.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return category_of(code_); }
    int exit_code() const noexcept { return static_cast<int>(category_of(code_)); }

private:
    ErrorCode code_;
};

}  // namespace scengen
