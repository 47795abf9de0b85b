#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace returnldp {

enum class ErrorKind {
  InvalidArgument,
  NotPrimitive,
  EmptyRowOrColumn,
  InadmissibleWord,
  StateCapExceeded,
  BlockTooShort,
  SpanTooLarge,
  NoConvergence,
  AlphaOutOfDomain,
  BracketFailure,
  SBelowCritical,
  HorizonTooSmall,
  UOutOfRange,
  OracleInconsistent,
  OracleProtocol,
  NotIrrational,
  EmptyInnerApproximation,
  InsufficientData,
  BudgetExceeded,
  TailNotCertified,
  ConfigError,
  CrosscheckFailed,
};

/// Stable identifier used in machine-readable error output.
std::string_view error_name(ErrorKind kind);

/// Process exit code for the CLI: 2 configuration, 3 numeric domain, 4 budget.
int exit_code_for(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace returnldp
