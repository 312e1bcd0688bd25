#include "lvmut/errors.hpp"

namespace lvmut {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NonPositiveRate: return "NonPositiveRate";
    case ErrorCode::NegativeMutation: return "NegativeMutation";
    case ErrorCode::InvalidInteraction: return "InvalidInteraction";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::WrongInteractionKind: return "WrongInteractionKind";
    case ErrorCode::ZeroInitialMass: return "ZeroInitialMass";
    case ErrorCode::NonPositivePerron: return "NonPositivePerron";
    case ErrorCode::Hypothesis3Violated: return "Hypothesis3Violated";
    case ErrorCode::InnerNoConvergence: return "InnerNoConvergence";
    case ErrorCode::LeftAprioriBox: return "LeftAprioriBox";
    case ErrorCode::NonPositiveReference: return "NonPositiveReference";
    case ErrorCode::AsymmetricMutation: return "AsymmetricMutation";
    case ErrorCode::NotStationaryReference: return "NotStationaryReference";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::ZeroReference: return "ZeroReference";
    case ErrorCode::KernelMismatch: return "KernelMismatch";
    case ErrorCode::InsufficientTail: return "InsufficientTail";
    case ErrorCode::OutOfTheoremScope: return "OutOfTheoremScope";
  }
  return "Unknown";
}

}  // namespace lvmut
