#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sdwave {

enum class ErrorKind {
    InvalidDimension,
    DegenerateInterval,
    TooFewCells,
    InvalidGrading,
    FieldMismatch,
    DimensionMismatch,
    OutOfDomain,
    InvalidArgument,
    ExponentUnderflow,
    NegativeData,
    BoundaryMismatch,
    LinearSolveFailure,
    NonFinite,
    HorizonExceeded,
    BlowUpInsideWindow,
    InsufficientPoints,
    Precondition,
    Config,
};

inline std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::InvalidDimension: return "invalid-dimension";
    case ErrorKind::DegenerateInterval: return "degenerate-interval";
    case ErrorKind::TooFewCells: return "too-few-cells";
    case ErrorKind::InvalidGrading: return "invalid-grading";
    case ErrorKind::FieldMismatch: return "grid-field-mismatch";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::OutOfDomain: return "out-of-domain";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::ExponentUnderflow: return "exponent-underflow";
    case ErrorKind::NegativeData: return "negativity-violation";
    case ErrorKind::BoundaryMismatch: return "boundary-mismatch";
    case ErrorKind::LinearSolveFailure: return "linear-solve-failure";
    case ErrorKind::NonFinite: return "nonfinite-values";
    case ErrorKind::HorizonExceeded: return "horizon-exceeded";
    case ErrorKind::BlowUpInsideWindow: return "blow-up-inside-window";
    case ErrorKind::InsufficientPoints: return "insufficient-points";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Config: return "config";
    }
    return "unknown";
}

/// Exception carrying a machine-checkable error category.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& what)
{
    if (!condition) throw Error(kind, what);
}

} // namespace sdwave
