#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spikeforge {

enum class ErrorKind {
    RangeViolation,
    SubcriticalViolation,
    SingularPoint,
    ShootingFailure,
    NewtonDivergence,
    NonPositive,
    TailTooShort,
    NotOnBoundary,
    BadResolution,
    CollapsedToTrivial,
    InsufficientData,
    UnsupportedDimension,
    PreconditionViolation,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure in the library is reported through this type; `kind()` is the
/// machine-readable tag that the CLI forwards into its error JSON.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace spikeforge
