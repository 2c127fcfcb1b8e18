// Copyright 2026 The pam-dissipation Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pam {

enum class ErrorKind {
    InvalidArgument,
    NotNormalized,
    NonzeroMean,
    DegenerateSupport,
    SelfLoopOnly,
    InvalidNonlinearity,
    BoxTooSmall,
    InsufficientReplicas,
    EmptyInput,
    NonPositiveEstimates,
    InvalidC,
    RecurrentWalk,
    EpsilonOutOfRange,
    InvalidMoment,
    WindowTooShort,
    DeltaOutOfRange,
    NonPositiveTime,
    StabilityViolated,
    NumericalFailure,
    Io,
    Parse,
};

inline constexpr std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::NonzeroMean: return "NonzeroMean";
    case ErrorKind::DegenerateSupport: return "DegenerateSupport";
    case ErrorKind::SelfLoopOnly: return "SelfLoopOnly";
    case ErrorKind::InvalidNonlinearity: return "InvalidNonlinearity";
    case ErrorKind::BoxTooSmall: return "BoxTooSmall";
    case ErrorKind::InsufficientReplicas: return "InsufficientReplicas";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::NonPositiveEstimates: return "NonPositiveEstimates";
    case ErrorKind::InvalidC: return "InvalidC";
    case ErrorKind::RecurrentWalk: return "RecurrentWalk";
    case ErrorKind::EpsilonOutOfRange: return "EpsilonOutOfRange";
    case ErrorKind::InvalidMoment: return "InvalidMoment";
    case ErrorKind::WindowTooShort: return "WindowTooShort";
    case ErrorKind::DeltaOutOfRange: return "DeltaOutOfRange";
    case ErrorKind::NonPositiveTime: return "NonPositiveTime";
    case ErrorKind::StabilityViolated: return "StabilityViolated";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Parse: return "Parse";
    }
    return "Unknown";
}

/// Exception carrying a machine-readable kind; what() is "<Kind>: <detail>".
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& detail)
        : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& detail)
{
    if (!condition) throw Error(kind, detail);
}

}  // namespace pam
