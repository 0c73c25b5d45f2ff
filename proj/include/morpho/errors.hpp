#pragma once

#include <stdexcept>
#include <string>

namespace morpho {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MORPHO_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

// tilt mechanism
MORPHO_DEFINE_ERROR(InfeasibleDisplacement);
MORPHO_DEFINE_ERROR(NonConvergence);

// dynamics
MORPHO_DEFINE_ERROR(EulerSingularity);
MORPHO_DEFINE_ERROR(NoCriticalAngle);
MORPHO_DEFINE_ERROR(InfeasibleMargin);
MORPHO_DEFINE_ERROR(InvalidParams);

// ground effect / file loading
MORPHO_DEFINE_ERROR(ParseError);
MORPHO_DEFINE_ERROR(NonRectangularGrid);
MORPHO_DEFINE_ERROR(NonPositiveRatio);

// optimization
MORPHO_DEFINE_ERROR(MaxIterations);
MORPHO_DEFINE_ERROR(NumericalBreakdown);
MORPHO_DEFINE_ERROR(SolverFailure);

// simulation / cli
MORPHO_DEFINE_ERROR(SimDiverged);
MORPHO_DEFINE_ERROR(ScenarioInvalid);
MORPHO_DEFINE_ERROR(NoTouchdown);
MORPHO_DEFINE_ERROR(UnknownParameter);
MORPHO_DEFINE_ERROR(IoError);

#undef MORPHO_DEFINE_ERROR

}  // namespace morpho
