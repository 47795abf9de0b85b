#pragma once

// Inner/outer cylinder approximations B_m c A c C_m of sets known only
// through a three-way membership oracle, and the diagnostics built on them.

#include "returnldp/deviations.hpp"
#include "returnldp/extended_real.hpp"
#include "returnldp/symbolic.hpp"
#include "returnldp/thermodynamics.hpp"

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace returnldp {

enum class Placement { inside, outside, straddles };

std::string_view placement_name(Placement p);

/// Decides where the cylinder [w] sits relative to a set A: contained in A,
/// disjoint from A, or neither. Implementations must be pure and reentrant,
/// and consistent under refinement (an inside/outside word stays so for
/// every extension).
class BorelOracle {
 public:
  virtual ~BorelOracle() = default;
  virtual int alphabet_size() const = 0;
  virtual Placement classify(const Word& w) const = 0;
  virtual std::string describe() const = 0;
};

/// A number in [0,1] through its base-N expansion, known to a fixed depth.
/// The endpoints 0 and 1 are exact; any other value must not have an
/// eventually periodic expansion within the audit depth.
class NaryThreshold {
 public:
  static constexpr int default_depth = 64;

  static NaryThreshold zero(int base);
  static NaryThreshold one(int base);
  /// Explicit digits (most significant first). Cannot be proven irrational,
  /// so a warning is attached; eventually periodic digit strings are rejected.
  static NaryThreshold from_digits(int base, std::vector<int> digits);
  /// sqrt(p/q) with 0 < p < q; rejected (NotIrrational) when it is rational.
  static NaryThreshold sqrt_rational(int base, std::uint64_t p, std::uint64_t q, int depth = default_depth);
  /// "0", "1", "sqrt(p/q)" or "digits:<base-N digits>". Anything else,
  /// including decimal fractions, is rejected.
  static NaryThreshold parse(std::string_view spec, int base, int depth = default_depth);

  int base() const { return base_; }
  bool is_zero() const { return kind_ == Kind::zero; }
  bool is_one() const { return kind_ == Kind::one; }
  int depth() const { return static_cast<int>(digits_.size()); }
  const std::vector<int>& digits() const { return digits_; }
  const std::string& warning() const { return warning_; }
  const std::string& text() const { return text_; }
  /// Double approximation, for reporting only.
  double approx() const;

 private:
  enum class Kind { zero, one, interior };
  NaryThreshold(int base, Kind kind, std::vector<int> digits, std::string text)
      : base_(base), kind_(kind), digits_(std::move(digits)), text_(std::move(text)) {}
  void audit_aperiodic();

  int base_;
  Kind kind_;
  std::vector<int> digits_;
  std::string text_;
  std::string warning_;
};

/// A = pi^{-1}([lo, hi)) with pi(x) = sum_k x_k N^{-k-1}. The word w covers
/// [0.w, 0.w + N^{-|w|}); it straddles exactly when that interval contains
/// an interior endpoint.
class IntervalOracle final : public BorelOracle {
 public:
  IntervalOracle(NaryThreshold lo, NaryThreshold hi);

  int alphabet_size() const override { return lo_.base(); }
  Placement classify(const Word& w) const override;
  std::string describe() const override;

  const NaryThreshold& lo() const { return lo_; }
  const NaryThreshold& hi() const { return hi_; }

 private:
  NaryThreshold lo_, hi_;
};

/// The exact set given by a cylinder union (empty boundary).
class CylinderOracle final : public BorelOracle {
 public:
  CylinderOracle(Sft sft, CylinderUnion set) : sft_(std::move(sft)), set_(std::move(set)) {}

  int alphabet_size() const override { return sft_.alphabet_size(); }
  Placement classify(const Word& w) const override;
  std::string describe() const override;

 private:
  Sft sft_;
  CylinderUnion set_;
};

/// Oracle served by an external process over a line protocol:
/// request "CLASSIFY <word>\n", response "IN", "OUT" or "STRADDLE".
/// Answers are cached; calls are serialized.
class ExternalOracle final : public BorelOracle {
 public:
  ExternalOracle(std::string command, int alphabet_size);
  ~ExternalOracle() override;
  ExternalOracle(const ExternalOracle&) = delete;
  ExternalOracle& operator=(const ExternalOracle&) = delete;

  int alphabet_size() const override { return alphabet_size_; }
  Placement classify(const Word& w) const override;
  std::string describe() const override { return "external:" + command_; }

 private:
  std::string command_;
  int alphabet_size_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  mutable std::mutex mutex_;
  mutable std::unordered_map<Word, Placement, WordHash> cache_;
  mutable std::string pending_;
};

/// Sampled refinement audit: random admissible words up to `max_length`
/// and random extensions of them. Throws OracleInconsistent on the first
/// inside/outside word whose extension is classified differently.
void audit_refinement(const BorelOracle& oracle, const Sft& sft, int max_length, int samples, std::uint64_t seed);

struct ApproxOptions {
  std::size_t state_cap = BlockSft::default_state_cap;
  int audit_samples = 10'000;
  std::uint64_t seed = 0;
};

struct ApproxStats {
  double mass_inner = 0.0;
  double mass_outer = 0.0;
  double mass_boundary = 0.0;
  std::optional<CycleMean<long>> max_boundary;  ///< empty when D_m is empty
  std::optional<CycleMean<long>> min_boundary;
  ExtendedReal alpha_inner;  ///< alpha(B_m) = P - P(dotted system of B_m)
  ExtendedReal alpha_outer;  ///< alpha(C_m)
};

struct ApproxFamily {
  int depth;
  CylinderUnion inner;     ///< B_m
  CylinderUnion outer;     ///< C_m
  CylinderUnion boundary;  ///< D_m = C_m \ B_m
  ApproxStats stats;
  GibbsMarkovMeasure measure;  ///< on the block chain used for the stats
};

ApproxFamily build_approximations(const BorelOracle& oracle, const Sft& sft, const LocalPotential& phi, int depth,
                                  const ApproxOptions& opts = {});

struct SandwichRow {
  int depth;
  double alpha;
  std::optional<double> psi_inner;  ///< Psi_{B_m}; empty when undefined
  std::optional<double> psi_outer;  ///< Psi_{C_m}
  std::optional<double> gap;        ///< |Psi_B - Psi_C|
  bool ordering_ok = true;          ///< Psi_C <= Psi_B for alpha >= 0, reversed below
  std::string note;
};

struct SandwichTable {
  std::vector<ApproxFamily> families;
  std::vector<SandwichRow> rows;

  const SandwichRow& at(int depth, double alpha) const;
};

SandwichTable sandwich_curves(const BorelOracle& oracle, const Sft& sft, const LocalPotential& phi,
                              const std::vector<int>& depths, const std::vector<double>& alphas,
                              const ApproxOptions& opts = {}, const CgfCurveOptions& curve_opts = {});

struct DecayFit {
  std::vector<int> depths;
  std::vector<double> masses;
  ExtendedReal theta_hat;  ///< +inf when every mass vanishes
  double c_hat = 0.0;
  ExtendedReal implied_gap;  ///< theta_hat / 2
  ExtendedReal implied_pressure_bound;  ///< P - theta_hat / 2
  std::vector<double> residuals;  ///< log mass - fitted line
  bool no_gap_evidence = false;
};

DecayFit decay_fit(const std::vector<int>& depths, const std::vector<double>& masses, double pressure_top);
DecayFit decay_fit(const std::vector<ApproxFamily>& families);

struct DmReport {
  int depth;
  double v;
  CycleMean<long> max_boundary;
  bool criterion;  ///< 1/max(D_m) > v, i.e. Phi_{D_m}(v) = -inf
  double slope_at_minus_40;  ///< Psi_D(-39) - Psi_D(-40)
  double slope_error;        ///< |slope - 1/max(D_m)|
  bool slope_ok;             ///< slope_error <= 1e-4
};

DmReport dm_diagnostics(const ApproxFamily& family, double v);

}  // namespace returnldp
