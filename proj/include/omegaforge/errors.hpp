#pragma once

#include <stdexcept>
#include <string>

namespace omegaforge {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define OMEGAFORGE_ERROR(Name)                               \
  struct Name : Error {                                      \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

OMEGAFORGE_ERROR(NotAPrefix);
OMEGAFORGE_ERROR(SpaceMismatch);
OMEGAFORGE_ERROR(PullbackNotRepresentable);
OMEGAFORGE_ERROR(NotRepresentable);
OMEGAFORGE_ERROR(RankTooLarge);
OMEGAFORGE_ERROR(NotExactlyEvaluable);
OMEGAFORGE_ERROR(DepthTooSmall);
OMEGAFORGE_ERROR(NotPiForm);
OMEGAFORGE_ERROR(NotInB);
OMEGAFORGE_ERROR(NotInC);
OMEGAFORGE_ERROR(BadIndices);
OMEGAFORGE_ERROR(NotInK);
OMEGAFORGE_ERROR(NotInP);
OMEGAFORGE_ERROR(NotMuWord);
OMEGAFORGE_ERROR(NotInT);
OMEGAFORGE_ERROR(UnknownName);
OMEGAFORGE_ERROR(LengthMismatch);
OMEGAFORGE_ERROR(ParseError);

#undef OMEGAFORGE_ERROR

}  // namespace omegaforge
