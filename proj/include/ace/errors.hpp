#pragma once

#include <stdexcept>
#include <string>

namespace ace {

// Base class for every error the library throws; subclasses mirror the
// failure taxonomy used across the module contracts so callers can catch
// a specific condition or the whole family.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define ACE_DEFINE_ERROR(Name)                                                 \
    class Name : public Error {                                               \
      public:                                                                  \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {}   \
    }

ACE_DEFINE_ERROR(InvalidLogits);
ACE_DEFINE_ERROR(InvalidParameter);
ACE_DEFINE_ERROR(InvalidDistribution);
ACE_DEFINE_ERROR(DegenerateVector);
ACE_DEFINE_ERROR(ShapeError);
ACE_DEFINE_ERROR(EmptyLibrary);
ACE_DEFINE_ERROR(CorruptLibrary);
ACE_DEFINE_ERROR(NoBackground);
ACE_DEFINE_ERROR(CannotPlacePatches);
ACE_DEFINE_ERROR(InvalidLayer);
ACE_DEFINE_ERROR(CannotPlant);
ACE_DEFINE_ERROR(NumericOverflow);
ACE_DEFINE_ERROR(InvalidToken);
ACE_DEFINE_ERROR(UnparsableAnswer);
ACE_DEFINE_ERROR(EmptyEval);
ACE_DEFINE_ERROR(IoError);

#undef ACE_DEFINE_ERROR

}  // namespace ace
