#ifndef PELW_ERROR_HPP
#define PELW_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace pelw {

enum class ErrorKind {
  SyntaxError,
  UnknownConstant,
  NotALattice,
  EmptyUniverse,
  ForeignElement,
  EmptyPreimage,
  NoLeastElement,
  NoGreatestElement,
  RangeViolation,
  NotConverged,
  SyncMismatch,
  StateCapExceeded,
  BudgetExceeded,
  IllFormedEquation,
  UnboundVariable,
  NotEnabled,
  UnsafeFiring,
  AlphabetClash,
  Unsupported,
  NotFound,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnknownConstant: return "UnknownConstant";
    case ErrorKind::NotALattice: return "NotALattice";
    case ErrorKind::EmptyUniverse: return "EmptyUniverse";
    case ErrorKind::ForeignElement: return "ForeignElement";
    case ErrorKind::EmptyPreimage: return "EmptyPreimage";
    case ErrorKind::NoLeastElement: return "NoLeastElement";
    case ErrorKind::NoGreatestElement: return "NoGreatestElement";
    case ErrorKind::RangeViolation: return "RangeViolation";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::SyncMismatch: return "SyncMismatch";
    case ErrorKind::StateCapExceeded: return "StateCapExceeded";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::IllFormedEquation: return "IllFormedEquation";
    case ErrorKind::UnboundVariable: return "UnboundVariable";
    case ErrorKind::NotEnabled: return "NotEnabled";
    case ErrorKind::UnsafeFiring: return "UnsafeFiring";
    case ErrorKind::AlphabetClash: return "AlphabetClash";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::NotFound: return "NotFound";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a kind so callers (and the
/// CLI exit-code mapping) can dispatch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pelw

#endif
