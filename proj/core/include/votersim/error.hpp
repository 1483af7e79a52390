#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace votersim {

enum class Errc {
  Asymmetric,
  NonIsotropic,
  OriginInSupport,
  NotNormalized,
  Reducible,
  EpsilonTooLarge,
  SelectionTooStrong,
  NegativeFitness,
  InvalidRates,
  KernelNotCovered,
  NegativeRate,
  TorusTooSmall,
  BlockMisaligned,
  HorizonExceeded,
  MissingInput,
  NotUniformKernel,
  DegenerateSum,
  NonSimpleRoot,
  IdenticallyZero,
  LeftUnitInterval,
  CFLViolation,
  NoFront,
  FrontAtBoundary,
  TooManyOffsets,
  InvalidArgument,
  ParseError,
  IOFailure,
};

std::string_view errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace votersim
