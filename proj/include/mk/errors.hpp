// errors.hpp: exception types thrown across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace mk {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MK_DEFINE_ERROR(Name)                \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

// Fock-space construction and truncation.
MK_DEFINE_ERROR(TruncationTooSmall);
MK_DEFINE_ERROR(NonDiagonalHamiltonian);

// Numerical integration.
MK_DEFINE_ERROR(QuadratureFailure);
MK_DEFINE_ERROR(DomainError);

// Time stepping.
MK_DEFINE_ERROR(UnstableStep);
MK_DEFINE_ERROR(StepTooLarge);
MK_DEFINE_ERROR(CFLViolation);

// Stationary-state solves.
MK_DEFINE_ERROR(DegenerateNullSpace);
MK_DEFINE_ERROR(NoPSDNullVector);

// Phase-space fields and transforms.
MK_DEFINE_ERROR(SingularReference);
MK_DEFINE_ERROR(GridUnderResolved);
MK_DEFINE_ERROR(KernelDivergence);
MK_DEFINE_ERROR(NonQuadraticKernel);
MK_DEFINE_ERROR(BoundaryLeak);

// Bath and reduced-dynamics inputs.
MK_DEFINE_ERROR(MissingBathQuantity);
MK_DEFINE_ERROR(NonHurwitzDrift);

#undef MK_DEFINE_ERROR

}  // namespace mk
