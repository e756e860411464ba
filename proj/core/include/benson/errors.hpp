#pragma once

#include <stdexcept>
#include <string>

namespace benson {

/// Base class of every error raised by the library. `kind()` is a stable
/// machine-readable identifier used in the CLI's error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define BENSON_DEFINE_ERROR(Name)                                       \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(#Name, what) {}     \
  };

// polyhedral geometry
BENSON_DEFINE_ERROR(LineError)
BENSON_DEFINE_ERROR(EmptyError)

// problem model
BENSON_DEFINE_ERROR(ConvexityError)
BENSON_DEFINE_ERROR(DomainError)
BENSON_DEFINE_ERROR(ConeError)
BENSON_DEFINE_ERROR(ParseError)

// scalarization and duality
BENSON_DEFINE_ERROR(ConeMembershipError)
BENSON_DEFINE_ERROR(WNormalizationError)
BENSON_DEFINE_ERROR(ZeroNormalError)
BENSON_DEFINE_ERROR(DualUnbounded)

// engines
BENSON_DEFINE_ERROR(InitUnboundedError)
BENSON_DEFINE_ERROR(VerticalInitError)
BENSON_DEFINE_ERROR(VerticalCutError)
BENSON_DEFINE_ERROR(CutValidationError)
BENSON_DEFINE_ERROR(SolverFailure)

#undef BENSON_DEFINE_ERROR

}  // namespace benson
