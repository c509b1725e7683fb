#pragma once

#include <stdexcept>
#include <string>

namespace paee {

// Base for every error thrown by the library. Each condition gets its own
// type so callers can catch precisely.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define PAEE_DEFINE_ERROR(Name)                                \
  struct Name : Error {                                        \
    explicit Name(const std::string& msg) : Error(msg) {}      \
  }

// data ingestion
PAEE_DEFINE_ERROR(MalformedRow);
PAEE_DEFINE_ERROR(NonMonotonicTime);
PAEE_DEFINE_ERROR(OutOfRange);
PAEE_DEFINE_ERROR(NegativeGasVolume);
PAEE_DEFINE_ERROR(NegativeInput);
PAEE_DEFINE_ERROR(NoOverlap);
PAEE_DEFINE_ERROR(IoError);

// preprocessing
PAEE_DEFINE_ERROR(EmptyWindow);
PAEE_DEFINE_ERROR(NonIntegralBinCount);
PAEE_DEFINE_ERROR(DegenerateChannel);
PAEE_DEFINE_ERROR(UnknownLabel);
PAEE_DEFINE_ERROR(NonPositiveInput);

// network / training
PAEE_DEFINE_ERROR(ShapeMismatch);
PAEE_DEFINE_ERROR(MissingCache);
PAEE_DEFINE_ERROR(StaticBranchMissing);
PAEE_DEFINE_ERROR(EmptyTrainingSet);
PAEE_DEFINE_ERROR(DivergedFold);

// evaluation
PAEE_DEFINE_ERROR(InsufficientSubjects);
PAEE_DEFINE_ERROR(LengthMismatch);
PAEE_DEFINE_ERROR(ZeroVariance);
PAEE_DEFINE_ERROR(DegenerateDifferences);

// configuration
PAEE_DEFINE_ERROR(InvalidConfig);
PAEE_DEFINE_ERROR(ConfigError);
PAEE_DEFINE_ERROR(FormatError);

#undef PAEE_DEFINE_ERROR

}  // namespace paee
