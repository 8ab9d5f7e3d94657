#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace brw {

enum class Errc {
  NotNormalized,
  NotCritical,
  NonzeroDrift,
  DegenerateVariance,
  CutoffTooSmall,
  OutOfRange,
  BadLawSpec,
  IterCapExceeded,
  GridTooSmall,
  ParticleOverflow,
  AttemptBudgetExceeded,
  NegativeArgument,
  BisectionFailure,
  StabilityViolation,
  GridMismatch,
  StepCapExceeded,
  PathBudgetExceeded,
  BadCounts,
  DegenerateInput,
  UnknownCommand,
  BadNumeric,
  IoFailure,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::NotNormalized: return "NotNormalized";
    case Errc::NotCritical: return "NotCritical";
    case Errc::NonzeroDrift: return "NonzeroDrift";
    case Errc::DegenerateVariance: return "DegenerateVariance";
    case Errc::CutoffTooSmall: return "CutoffTooSmall";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::BadLawSpec: return "BadLawSpec";
    case Errc::IterCapExceeded: return "IterCapExceeded";
    case Errc::GridTooSmall: return "GridTooSmall";
    case Errc::ParticleOverflow: return "ParticleOverflow";
    case Errc::AttemptBudgetExceeded: return "AttemptBudgetExceeded";
    case Errc::NegativeArgument: return "NegativeArgument";
    case Errc::BisectionFailure: return "BisectionFailure";
    case Errc::StabilityViolation: return "StabilityViolation";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::StepCapExceeded: return "StepCapExceeded";
    case Errc::PathBudgetExceeded: return "PathBudgetExceeded";
    case Errc::BadCounts: return "BadCounts";
    case Errc::DegenerateInput: return "DegenerateInput";
    case Errc::UnknownCommand: return "UnknownCommand";
    case Errc::BadNumeric: return "BadNumeric";
    case Errc::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code. The message is prefixed with
/// the code name so logs stay greppable.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace brw
