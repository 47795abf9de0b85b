#pragma once

// Ground truth for return-time statistics under a Gibbs Markov measure:
// exact dynamic programming over (chain state, returns so far), exact
// generating functions, seeded Monte Carlo, and auxiliary consistency checks.

#include "returnldp/borel.hpp"
#include "returnldp/deviations.hpp"
#include "returnldp/extended_real.hpp"
#include "returnldp/symbolic.hpp"
#include "returnldp/thermodynamics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace returnldp {

enum class StartMode { full_space, conditioned_on_target, conditioned_on_set };

std::string_view start_mode_name(StartMode m);

struct DpOptions {
  double budget = 1e9;  ///< state_count * n * T elementary updates
};

/// Law of the n-th return time r^n_R, truncated at the horizon.
struct ReturnTimeDistribution {
  int n = 0;
  int horizon = 0;
  std::vector<double> probs;  ///< probs[t] = mu(r^n = t), t = 0..horizon
  double tail_mass = 0.0;     ///< mu(r^n > horizon)
  StartMode start_mode = StartMode::full_space;

  /// |sum probs + tail - 1|.
  double mass_defect() const;
};

/// Initial law on block states: stationary, or stationary conditioned on
/// `R` (conditioned_on_target) or on `S` (conditioned_on_set).
Eigen::VectorXd start_vector(const GibbsMarkovMeasure& mu, const CylinderUnion& R, StartMode mode,
                             const CylinderUnion* S = nullptr);

ReturnTimeDistribution return_distribution(const GibbsMarkovMeasure& mu, const CylinderUnion& R, int n, int horizon,
                                           StartMode mode = StartMode::full_space, const CylinderUnion* S = nullptr,
                                           const DpOptions& opts = {});

/// (1/n) log E[exp(alpha r^n_R)] without truncation, from the first-return
/// generating matrix H(z) = z (I - zQ)^{-1} B, z = e^alpha, where Q and B
/// are the kernel restricted to columns outside and inside R. Requires
/// alpha < alpha_max (AlphaOutOfDomain).
double exact_mgf_rate(const GibbsMarkovMeasure& mu, const CylinderUnion& R, int n, double alpha,
                      StartMode mode = StartMode::full_space, const CylinderUnion* S = nullptr);

struct EmpiricalCgf {
  double value = 0.0;  ///< (1/n) log of the midpoint of the bracket
  double lower = 0.0;  ///< truncated sum only
  double upper = 0.0;  ///< truncated sum plus the certified remainder bound
  double truncation_bound = 0.0;  ///< upper - lower
  double alpha_prime = 0.0;       ///< Markov-bound exponent (alpha > 0 only)
  int horizon = 0;
};

/// (1/n) log(sum_t p_t e^{alpha t} + remainder) with the remainder bounded by
/// e^{alpha (T+1)} tail for alpha < 0, or through a Markov bound at
/// alpha' in (alpha, alpha_max) for alpha > 0 (TailNotCertified if none).
EmpiricalCgf empirical_cgf(const GibbsMarkovMeasure& mu, const CylinderUnion& R,
                           const ReturnTimeDistribution& dist, double alpha, const CylinderUnion* S = nullptr);

/// Doubles the horizon from max(4n, 64) until truncation_bound <= tolerance
/// or the budget is reached.
EmpiricalCgf empirical_cgf_auto(const GibbsMarkovMeasure& mu, const CylinderUnion& R, int n, double alpha,
                                StartMode mode = StartMode::full_space, const CylinderUnion* S = nullptr,
                                double tolerance = 1e-10, const DpOptions& opts = {});

enum class TailDirection { at_least, at_most };

/// Event used for a normalized return time u: r^n >= ceil(n u) when
/// u >= 1/mu(R), otherwise r^n <= floor(n u).
struct TailEvent {
  TailDirection direction;
  long threshold;
};

TailEvent tail_event(double mean_return, int n, double u);

/// (1/n) log mu(event) computed exactly by the DP.
ExtendedReal exact_tail(const GibbsMarkovMeasure& mu, const CylinderUnion& R, int n, double u,
                        const DpOptions& opts = {});

struct McEstimate {
  std::uint64_t seed = 0;
  long samples = 0;
  long hits = 0;
  TailEvent event{TailDirection::at_least, 0};
  ExtendedReal value;          ///< (1/n) log p_hat; -inf on zero hits
  double probability = 0.0;    ///< p_hat
  double ci_half_width = 0.0;  ///< 95% normal approximation (delta method)
  bool zero_hits = false;
  std::string note;
};

struct McOptions {
  long samples = 1'000'000;
  std::uint64_t seed = 0;
  unsigned threads = 0;  ///< 0 = hardware concurrency
};

/// Monte Carlo estimate of (1/n) log mu(r^n_R / n >= u) (or <= u below the
/// mean) from the stationary chain; sample i uses stream i of the seed.
McEstimate mc_tail(const GibbsMarkovMeasure& mu, const CylinderUnion& R, int n, double u, const McOptions& opts = {});

/// Same with A-membership decided by the oracle: the word starting at each
/// visited time is extended along the sampled orbit until it stops
/// straddling (up to `max_depth`, after which it counts as inside).
McEstimate mc_tail(const GibbsMarkovMeasure& mu, const BorelOracle& oracle, double mean_return, int depth, int n,
                   double u, const McOptions& opts = {}, int max_depth = NaryThreshold::default_depth);

struct DominationReport {
  int n = 0;
  long samples = 0;
  long violations = 0;  ///< orbits where r^n_B >= r^n_A >= r^n_C fails
  long undecided = 0;   ///< visits still straddling at the maximal depth
};

/// Simulates orbits and compares the n-th return times to B_m, to the set A
/// (oracle-decided along the orbit) and to C_m.
DominationReport sandwich_domination(const ApproxFamily& family, const BorelOracle& oracle, int n, long samples,
                                     std::uint64_t seed, int max_depth = NaryThreshold::default_depth);

struct GapSequence {
  std::vector<int> ns;
  std::vector<double> gaps;
  bool decreasing = false;  ///< every step non-increasing
  bool halves = false;      ///< last <= first / 2
  bool small = false;       ///< last < limit
  bool passed() const { return halves && small; }
};

GapSequence make_gap_sequence(std::vector<int> ns, std::vector<double> gaps, double limit);

struct EntranceReturnReport {
  double alpha = 0.0;
  std::vector<double> from_set;     ///< start conditioned on S
  std::vector<double> from_target;  ///< start conditioned on R
  std::vector<double> from_full;    ///< stationary start
  double spectral = 0.0;            ///< cgf_at
  GapSequence gaps;                 ///< max pairwise gap per n
};

EntranceReturnReport entrance_vs_return_check(const GibbsMarkovMeasure& mu, const CylinderUnion& R,
                                              const CylinderUnion& S, const std::vector<int>& ns, double alpha);

struct ConcentrationVariant {
  std::string name;
  double tau = 0.0;  ///< formula value plus the margin
  std::vector<ExtendedReal> restricted;  ///< (1/n) log of the integral over r^n <= n tau
  std::vector<double> unrestricted;
  GapSequence gaps;  ///< relative gap per n
};

struct ConcentrationReport {
  double alpha = 0.0;
  double delta = 0.0;
  double margin = 0.0;
  ConcentrationVariant stated;  ///< tau > (Psi(alpha + delta) - Psi(delta)) / delta
  ConcentrationVariant proof;   ///< tau > (Psi(alpha + delta) - Psi(alpha)) / delta
};

ConcentrationReport concentration_check(const GibbsMarkovMeasure& mu, const CylinderUnion& R, double alpha,
                                        double delta, const std::vector<int>& ns, double margin = 0.05);

/// Concentration gaps for an explicit tau.
ConcentrationVariant concentration_at(const GibbsMarkovMeasure& mu, const CylinderUnion& R, double alpha, double tau,
                                      const std::vector<int>& ns, std::string name = "explicit");

struct GibbsBoundReport {
  std::vector<int> ns;
  std::vector<double> b_hat;  ///< max |log ratio| over words of length <= n
  std::vector<double> lo;     ///< min log ratio at length n
  std::vector<double> hi;     ///< max log ratio at length n
  bool stable = false;        ///< b_hat(n_max) - b_hat(n_max - 2) < 1e-9
};

/// log[mu(w) / exp(S_n phi(w) - n P)] over all admissible words of length
/// L..n_max, where L is the block length of the measure.
GibbsBoundReport gibbs_bound_check(const GibbsMarkovMeasure& mu, int n_max, double budget = 1e8);

}  // namespace returnldp
