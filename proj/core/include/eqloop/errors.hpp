#pragma once

#include <stdexcept>
#include <string>

namespace eqloop {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define EQLOOP_DECLARE_ERROR(Name)            \
  class Name : public Error {                 \
   public:                                    \
    using Error::Error;                       \
  }

EQLOOP_DECLARE_ERROR(CutLocusError);     // geodesic chord beyond the injectivity radius
EQLOOP_DECLARE_ERROR(PrecisionError);    // evaluation outside the certified range
EQLOOP_DECLARE_ERROR(TubeError);         // point left the projection tube
EQLOOP_DECLARE_ERROR(DegreeError);
EQLOOP_DECLARE_ERROR(DegreeMismatch);
EQLOOP_DECLARE_ERROR(ParityError);
EQLOOP_DECLARE_ERROR(NotClosedError);
EQLOOP_DECLARE_ERROR(ConvergenceError);
EQLOOP_DECLARE_ERROR(PartitionError);
EQLOOP_DECLARE_ERROR(BoundaryError);
EQLOOP_DECLARE_ERROR(SingularError);     // division by a functional below its floor
EQLOOP_DECLARE_ERROR(EmptyCoverError);
EQLOOP_DECLARE_ERROR(CoverError);
EQLOOP_DECLARE_ERROR(ConfigError);

#undef EQLOOP_DECLARE_ERROR

}  // namespace eqloop
