#ifndef CFSTAB_ERROR_HPP
#define CFSTAB_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace cfstab {

enum class ErrorKind {
  // numerical preconditions
  SingularMatrix,
  NotSymmetric,
  NoConvergence,
  NotPositiveDefinite,
  ModulusTooSmall,
  FloorCollapsed,
  InvalidFloor,
  NotOrthogonal,
  SingularAfterRounding,
  HypothesisViolated,
  TooFewSamples,
  NoClosedForm,
  // caller errors
  InvalidArgument,
  GridMismatch,
  DimensionTooLarge,
  // configuration
  ParseError,
  SchemaError,
  // should never happen
  Internal,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::ModulusTooSmall: return "ModulusTooSmall";
    case ErrorKind::FloorCollapsed: return "FloorCollapsed";
    case ErrorKind::InvalidFloor: return "InvalidFloor";
    case ErrorKind::NotOrthogonal: return "NotOrthogonal";
    case ErrorKind::SingularAfterRounding: return "SingularAfterRounding";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::NoClosedForm: return "NoClosedForm";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::Internal: return "Internal";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace cfstab

#endif  // CFSTAB_ERROR_HPP
