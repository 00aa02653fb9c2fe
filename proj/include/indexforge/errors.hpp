#pragma once

#include <stdexcept>
#include <string>

namespace indexforge {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorClass {
  domain,    // input outside an operation's mathematical domain
  numerical  // a computation failed to reach its stated tolerance
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), class_(cls) {}
  ErrorClass error_class() const noexcept { return class_; }

 private:
  ErrorClass class_;
};

#define INDEXFORGE_DEFINE_ERROR(Name, Cls)                               \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& what) : Error(ErrorClass::Cls, what) {} \
  };

INDEXFORGE_DEFINE_ERROR(DomainError, domain)
INDEXFORGE_DEFINE_ERROR(ArgumentError, domain)
INDEXFORGE_DEFINE_ERROR(DimensionError, domain)
INDEXFORGE_DEFINE_ERROR(CapacityError, domain)
INDEXFORGE_DEFINE_ERROR(DegeneracyError, domain)
INDEXFORGE_DEFINE_ERROR(UnsupportedSpaceError, domain)
INDEXFORGE_DEFINE_ERROR(NumericalError, numerical)
INDEXFORGE_DEFINE_ERROR(ResolutionError, numerical)
INDEXFORGE_DEFINE_ERROR(IntegrationError, numerical)
INDEXFORGE_DEFINE_ERROR(TruncationError, numerical)

#undef INDEXFORGE_DEFINE_ERROR

}  // namespace indexforge
