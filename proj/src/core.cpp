#include "returnldp/error.hpp"
#include "returnldp/extended_real.hpp"

#include <charconv>
#include <cmath>

namespace returnldp {

std::string_view error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotPrimitive: return "NotPrimitive";
    case ErrorKind::EmptyRowOrColumn: return "EmptyRowOrColumn";
    case ErrorKind::InadmissibleWord: return "InadmissibleWord";
    case ErrorKind::StateCapExceeded: return "StateCapExceeded";
    case ErrorKind::BlockTooShort: return "BlockTooShort";
    case ErrorKind::SpanTooLarge: return "SpanTooLarge";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::AlphaOutOfDomain: return "AlphaOutOfDomain";
    case ErrorKind::BracketFailure: return "BracketFailure";
    case ErrorKind::SBelowCritical: return "SBelowCritical";
    case ErrorKind::HorizonTooSmall: return "HorizonTooSmall";
    case ErrorKind::UOutOfRange: return "UOutOfRange";
    case ErrorKind::OracleInconsistent: return "OracleInconsistent";
    case ErrorKind::OracleProtocol: return "OracleProtocol";
    case ErrorKind::NotIrrational: return "NotIrrational";
    case ErrorKind::EmptyInnerApproximation: return "EmptyInnerApproximation";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::TailNotCertified: return "TailNotCertified";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::CrosscheckFailed: return "CrosscheckFailed";
  }
  return "Unknown";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::NotPrimitive:
    case ErrorKind::EmptyRowOrColumn:
    case ErrorKind::InadmissibleWord:
    case ErrorKind::NotIrrational:
    case ErrorKind::OracleProtocol:
    case ErrorKind::ConfigError:
      return 2;
    case ErrorKind::StateCapExceeded:
    case ErrorKind::BudgetExceeded:
      return 4;
    default:
      return 3;
  }
}

double ExtendedReal::value() const {
  if (kind_ != Kind::finite) {
    throw Error(ErrorKind::InvalidArgument, "value() on infinite ExtendedReal");
  }
  return value_;
}

std::string ExtendedReal::str() const {
  switch (kind_) {
    case Kind::neg_infinity: return "-inf";
    case Kind::pos_infinity: return "inf";
    default: break;
  }
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, value_);
  return std::string(buf, res.ptr);
}

ExtendedReal reciprocal(double nonnegative) {
  if (!(nonnegative >= 0.0)) throw Error(ErrorKind::InvalidArgument, "reciprocal of a negative value");
  if (nonnegative == 0.0) return ExtendedReal::pos_infinity();
  if (std::isinf(nonnegative)) return ExtendedReal::finite(0.0);
  return ExtendedReal::finite(1.0 / nonnegative);
}

ExtendedReal difference(double a, const ExtendedReal& b) {
  if (b.is_neg_infinity()) return ExtendedReal::pos_infinity();
  if (b.is_pos_infinity()) return ExtendedReal::neg_infinity();
  return ExtendedReal::finite(a - b.value());
}

}  // namespace returnldp
