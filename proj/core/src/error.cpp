#include "votersim/error.hpp"

namespace votersim {

std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::Asymmetric: return "Asymmetric";
    case Errc::NonIsotropic: return "NonIsotropic";
    case Errc::OriginInSupport: return "OriginInSupport";
    case Errc::NotNormalized: return "NotNormalized";
    case Errc::Reducible: return "Reducible";
    case Errc::EpsilonTooLarge: return "EpsilonTooLarge";
    case Errc::SelectionTooStrong: return "SelectionTooStrong";
    case Errc::NegativeFitness: return "NegativeFitness";
    case Errc::InvalidRates: return "InvalidRates";
    case Errc::KernelNotCovered: return "KernelNotCovered";
    case Errc::NegativeRate: return "NegativeRate";
    case Errc::TorusTooSmall: return "TorusTooSmall";
    case Errc::BlockMisaligned: return "BlockMisaligned";
    case Errc::HorizonExceeded: return "HorizonExceeded";
    case Errc::MissingInput: return "MissingInput";
    case Errc::NotUniformKernel: return "NotUniformKernel";
    case Errc::DegenerateSum: return "DegenerateSum";
    case Errc::NonSimpleRoot: return "NonSimpleRoot";
    case Errc::IdenticallyZero: return "IdenticallyZero";
    case Errc::LeftUnitInterval: return "LeftUnitInterval";
    case Errc::CFLViolation: return "CFLViolation";
    case Errc::NoFront: return "NoFront";
    case Errc::FrontAtBoundary: return "FrontAtBoundary";
    case Errc::TooManyOffsets: return "TooManyOffsets";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ParseError: return "ParseError";
    case Errc::IOFailure: return "IOFailure";
  }
  return "Unknown";
}

}  // namespace votersim
