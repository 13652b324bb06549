#pragma once

#include <stdexcept>
#include <string>

namespace logsymp {

enum class ErrorKind {
  Catalog,
  Parse,
  SingularPoint,
  Degeneracy,
  UnsupportedDegree,
  NotClosed,
  NotSmooth,
  NonConvergence,
  ChartEscape,
  Stiffness,
  NoPrimitive,
  OrientationMismatch,
  Inadmissible,
  TangencyFailure,
  InvalidStructure,
  NotInvariant,
  Rejected,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (and the CLI
/// exit-code contract) can tell numeric verdicts from malformed input.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace logsymp
