#pragma once

#include <stdexcept>
#include <string>

namespace mca {

enum class ErrorKind {
  InvalidOrder,
  InvalidArity,
  InvalidAction,
  TableInvalid,
  NotNormal,
  NotAbelian,
  NotCentral,
  NotInvariant,
  NotPermutative,
  NotHomomorphism,
  SizeLimit,
  WindowLength,
  FrameInconsistency,
  InvalidSpec,
  Internal,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (and the CLI)
/// can branch on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidOrder: return "invalid-order";
    case ErrorKind::InvalidArity: return "invalid-arity";
    case ErrorKind::InvalidAction: return "invalid-action";
    case ErrorKind::TableInvalid: return "table-invalid";
    case ErrorKind::NotNormal: return "not-normal";
    case ErrorKind::NotAbelian: return "not-abelian";
    case ErrorKind::NotCentral: return "not-central";
    case ErrorKind::NotInvariant: return "not-invariant";
    case ErrorKind::NotPermutative: return "not-permutative";
    case ErrorKind::NotHomomorphism: return "not-homomorphism";
    case ErrorKind::SizeLimit: return "size-limit";
    case ErrorKind::WindowLength: return "window-length";
    case ErrorKind::FrameInconsistency: return "frame-inconsistency";
    case ErrorKind::InvalidSpec: return "invalid-spec";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

}  // namespace mca
