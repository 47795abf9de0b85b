#pragma once

#include <compare>
#include <limits>
#include <string>

namespace returnldp {

/// A real number or one of the two infinities, carried as an explicit tag.
///
/// Pressures of empty subshifts, unbounded domains and rate values outside
/// the admissible interval are represented with the tags; the payload is
/// never a floating-point infinity.
class ExtendedReal {
 public:
  enum class Kind { finite, neg_infinity, pos_infinity };

  constexpr ExtendedReal() = default;

  static constexpr ExtendedReal finite(double v) { return ExtendedReal(Kind::finite, v); }
  static constexpr ExtendedReal neg_infinity() { return ExtendedReal(Kind::neg_infinity, 0.0); }
  static constexpr ExtendedReal pos_infinity() { return ExtendedReal(Kind::pos_infinity, 0.0); }

  constexpr Kind kind() const { return kind_; }
  constexpr bool is_finite() const { return kind_ == Kind::finite; }
  constexpr bool is_neg_infinity() const { return kind_ == Kind::neg_infinity; }
  constexpr bool is_pos_infinity() const { return kind_ == Kind::pos_infinity; }

  /// Finite payload; throws for the infinite tags.
  double value() const;

  /// Payload mapped to IEEE infinities, for arithmetic at the edges only.
  constexpr double as_double() const {
    switch (kind_) {
      case Kind::neg_infinity: return -std::numeric_limits<double>::infinity();
      case Kind::pos_infinity: return std::numeric_limits<double>::infinity();
      default: return value_;
    }
  }

  /// "-inf", "inf" or the shortest round-tripping decimal.
  std::string str() const;

  friend constexpr bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    return a.kind_ == b.kind_ && (a.kind_ != Kind::finite || a.value_ == b.value_);
  }
  friend constexpr std::partial_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b) {
    return a.as_double() <=> b.as_double();
  }

 private:
  constexpr ExtendedReal(Kind k, double v) : kind_(k), value_(v) {}

  Kind kind_ = Kind::finite;
  double value_ = 0.0;
};

/// Reciprocal with 1/0 = +inf and 1/(+inf) = 0; negative inputs are rejected.
ExtendedReal reciprocal(double nonnegative);

/// a - b for finite a; subtracting -inf gives +inf.
ExtendedReal difference(double a, const ExtendedReal& b);

}  // namespace returnldp
