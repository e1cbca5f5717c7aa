#pragma once

#include <stdexcept>
#include <string>

namespace holo {

// Base of every error the library raises. Callers that only care about
// "something in holo failed" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define HOLO_DEFINE_ERROR(Name) \
  class Name : public Error {   \
   public:                      \
    using Error::Error;         \
  }

HOLO_DEFINE_ERROR(DimensionError);
HOLO_DEFINE_ERROR(NumericError);
HOLO_DEFINE_ERROR(ConfigError);
HOLO_DEFINE_ERROR(PoolingError);
HOLO_DEFINE_ERROR(LabelError);
HOLO_DEFINE_ERROR(VocabError);
HOLO_DEFINE_ERROR(TruncationError);
HOLO_DEFINE_ERROR(SplitError);
HOLO_DEFINE_ERROR(ManifestError);
HOLO_DEFINE_ERROR(CurationError);
HOLO_DEFINE_ERROR(MetricError);
HOLO_DEFINE_ERROR(IoError);

#undef HOLO_DEFINE_ERROR

}  // namespace holo
