#pragma once

#include <stdexcept>
#include <string>

namespace rotor {

// Root of every error thrown by the library. Each subclass names one
// failure condition so callers (and the CLI exit-code mapping) can tell
// them apart without parsing messages.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ROTOR_DEFINE_ERROR(Name)          \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

ROTOR_DEFINE_ERROR(ChainSpecError);
ROTOR_DEFINE_ERROR(RowSumError);
ROTOR_DEFINE_ERROR(NegativeProbError);
ROTOR_DEFINE_ERROR(DanglingVertexError);
ROTOR_DEFINE_ERROR(SelfRedirectError);
ROTOR_DEFINE_ERROR(MissingValueError);
ROTOR_DEFINE_ERROR(SingularSystemError);
ROTOR_DEFINE_ERROR(ReducibleChainError);
ROTOR_DEFINE_ERROR(OrderingMismatchError);
ROTOR_DEFINE_ERROR(InfiniteConstantError);
ROTOR_DEFINE_ERROR(SetupError);
ROTOR_DEFINE_ERROR(BudgetError);
ROTOR_DEFINE_ERROR(UndecidedError);
ROTOR_DEFINE_ERROR(MatchingFailure);
ROTOR_DEFINE_ERROR(NotNormalizedError);
ROTOR_DEFINE_ERROR(PeriodTooLargeError);
ROTOR_DEFINE_ERROR(EmptyBoxError);
ROTOR_DEFINE_ERROR(PpmFormatError);
ROTOR_DEFINE_ERROR(UsageError);

#undef ROTOR_DEFINE_ERROR

}  // namespace rotor
