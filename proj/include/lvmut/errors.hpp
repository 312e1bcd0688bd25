#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lvmut {

enum class ErrorCode {
  DimensionMismatch,
  NonFiniteInput,
  NonPositiveRate,
  NegativeMutation,
  InvalidInteraction,
  NotIrreducible,
  NoConvergence,
  NotSymmetric,
  SingularMatrix,
  StepSizeUnderflow,
  NonFiniteState,
  WrongInteractionKind,
  ZeroInitialMass,
  NonPositivePerron,
  Hypothesis3Violated,
  InnerNoConvergence,
  LeftAprioriBox,
  NonPositiveReference,
  AsymmetricMutation,
  NotStationaryReference,
  TooFewSamples,
  ZeroReference,
  KernelMismatch,
  InsufficientTail,
  OutOfTheoremScope,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so that
// callers (and the CLI) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lvmut
