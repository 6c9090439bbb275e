#pragma once

#include <stdexcept>
#include <string>

namespace dialkit {

// Base of every error the library throws. Each subclass names one failure
// category so callers (and the CLI exit-code mapping) can dispatch on type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DIALKIT_DEFINE_ERROR(Name)       \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

DIALKIT_DEFINE_ERROR(DomainError);
DIALKIT_DEFINE_ERROR(CalibrationMismatch);
DIALKIT_DEFINE_ERROR(VariantMismatch);
DIALKIT_DEFINE_ERROR(EmptyBatch);
DIALKIT_DEFINE_ERROR(DimensionMismatch);
DIALKIT_DEFINE_ERROR(EmptyGroup);
DIALKIT_DEFINE_ERROR(StyleError);
DIALKIT_DEFINE_ERROR(ConfigError);
DIALKIT_DEFINE_ERROR(IoError);
DIALKIT_DEFINE_ERROR(ParseError);
DIALKIT_DEFINE_ERROR(MetadataError);
DIALKIT_DEFINE_ERROR(SchemaError);
DIALKIT_DEFINE_ERROR(UnknownId);
DIALKIT_DEFINE_ERROR(DuplicateId);
DIALKIT_DEFINE_ERROR(SingleCluster);

#undef DIALKIT_DEFINE_ERROR

}  // namespace dialkit
