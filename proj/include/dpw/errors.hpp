#pragma once

#include <stdexcept>
#include <string>

namespace dpw {

// Base for all structured failures thrown by the library.  `kind()` is a
// stable machine-readable tag; the what() string carries context.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

private:
  std::string kind_;
};

#define DPW_DEFINE_ERROR(NAME)                                  \
  class NAME : public Error {                                   \
  public:                                                       \
    explicit NAME(const std::string& msg) : Error(#NAME, msg) {} \
  }

DPW_DEFINE_ERROR(SingularAtZero);
DPW_DEFINE_ERROR(PoleOffCircle);
DPW_DEFINE_ERROR(PoleCollision);
DPW_DEFINE_ERROR(SymmetryViolated);
DPW_DEFINE_ERROR(EigenlineDegenerate);
DPW_DEFINE_ERROR(KernelsDependent);
DPW_DEFINE_ERROR(NonUnimodular);
DPW_DEFINE_ERROR(SignTableMissing);
DPW_DEFINE_ERROR(StepUnderflow);
DPW_DEFINE_ERROR(NewtonDivergence);
DPW_DEFINE_ERROR(SeedNewtonDivergence);
DPW_DEFINE_ERROR(NonIntegerGenus);
DPW_DEFINE_ERROR(ExcessMismatch);
DPW_DEFINE_ERROR(VariantInvalid);
DPW_DEFINE_ERROR(UnsupportedSize);
DPW_DEFINE_ERROR(SpinMismatch);
DPW_DEFINE_ERROR(ConjugatorNotFound);
DPW_DEFINE_ERROR(FactorizationStall);
DPW_DEFINE_ERROR(NearPole);
DPW_DEFINE_ERROR(NonClosingOrbit);
DPW_DEFINE_ERROR(NotUnitarizable);
DPW_DEFINE_ERROR(BadInput);

#undef DPW_DEFINE_ERROR

}  // namespace dpw
