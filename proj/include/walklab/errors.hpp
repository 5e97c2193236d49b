#pragma once

#include <stdexcept>
#include <string>

namespace walklab {

// Error taxonomy shared by all modules. Each failure mode the library can
// report deliberately gets its own type so tests can assert on them.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define WALKLAB_ERROR(NAME)                                \
  struct NAME : Error {                                    \
    explicit NAME(const std::string& msg) : Error(#NAME ": " + msg) {} \
  }

WALKLAB_ERROR(InadmissiblePair);
WALKLAB_ERROR(NonpositiveScale);
WALKLAB_ERROR(QuadratureFailure);
WALKLAB_ERROR(BadFamilyParams);
WALKLAB_ERROR(BudgetTooSmall);
WALKLAB_ERROR(HorizonTooLarge);
WALKLAB_ERROR(ImpossibleEvent);
WALKLAB_ERROR(RejectionBudgetExceeded);
WALKLAB_ERROR(EmptyBin);
WALKLAB_ERROR(InconsistentEstimates);
WALKLAB_ERROR(RegimeMismatch);
WALKLAB_ERROR(TooFewAccepted);
WALKLAB_ERROR(PopulationOverflow);
WALKLAB_ERROR(EmptySample);
WALKLAB_ERROR(InvalidConfig);
WALKLAB_ERROR(DependencyMissing);
WALKLAB_ERROR(IoFailure);

#undef WALKLAB_ERROR

}  // namespace walklab
