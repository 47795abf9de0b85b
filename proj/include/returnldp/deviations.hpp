#pragma once

// Scaled cumulant generating functions of return times into cylinder unions,
// their Legendre transforms, and the complement transfer of rate functions.
//
// Psi_R(alpha) is the unique t with P(phi - t 1_R) = P(phi) - alpha, valid for
// alpha < alpha_max = P(phi) - P(phi | orbits avoiding R). The truncated
// induced (first-return) operator gives an independent route:
// exp(Psi_R(alpha)) = rho(L_{P - alpha}).

#include "returnldp/extended_real.hpp"
#include "returnldp/symbolic.hpp"
#include "returnldp/thermodynamics.hpp"

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace returnldp {

struct DeviationDomain {
  double pressure_top = 0.0;
  ExtendedReal s_critical;  ///< pressure of the dotted system
  ExtendedReal alpha_max;   ///< pressure_top - s_critical
  double measure = 0.0;     ///< mu_phi(R)
  double max_measure = 0.0;
  double min_measure = 0.0;
  ExtendedReal inv_max;  ///< 1 / max(R)
  ExtendedReal inv_min;  ///< 1 / min(R), +inf when min(R) = 0
};

DeviationDomain deviation_domain(const BlockSft& block, const LocalPotential& phi, const CylinderUnion& R);

struct BisectionOptions {
  double tolerance = 1e-11;     ///< final bracket width in t
  double max_abs_penalty = 650.0;  ///< bracket expansion stops here (BracketFailure)
};

/// Root-finder for the pressure equation on a fixed block/potential/target.
/// Evaluations at different alphas are independent and reentrant.
class CgfSolver {
 public:
  CgfSolver(const BlockSft& block, const LocalPotential& phi, const CylinderUnion& R, BisectionOptions opts = {});

  const DeviationDomain& domain() const { return domain_; }

  /// Psi_R(alpha). Throws AlphaOutOfDomain for alpha >= alpha_max and
  /// BracketFailure when the root lies beyond max_abs_penalty.
  double operator()(double alpha) const;

 private:
  std::shared_ptr<const PenalizedPressure> pressure_;
  DeviationDomain domain_;
  BisectionOptions opts_;
};

double cgf_at(const BlockSft& block, const LocalPotential& phi, const CylinderUnion& R, double alpha);

struct CgfCurveOptions {
  double domain_margin = 1e-3;  ///< grid must stay below alpha_max (1 - margin)
  double alpha_lo = -40.0;      ///< smallest admissible grid point (inclusive)
};

struct CgfCurve {
  std::vector<double> alphas;  ///< sorted, contains 0
  std::vector<double> values;
  DeviationDomain domain;
  /// Evaluates Psi off the grid; used by the Legendre refinement.
  std::function<double(double)> evaluator;

  /// Empty when Psi(0) = 0, monotonicity, convexity and sign conditions hold.
  std::vector<std::string> invariant_violations() const;
};

CgfCurve cgf_curve(const BlockSft& block, const LocalPotential& phi, const CylinderUnion& R,
                   std::vector<double> grid, const CgfCurveOptions& opts = {});
CgfCurve cgf_curve(const CgfSolver& solver, std::vector<double> grid, const CgfCurveOptions& opts = {});

/// Evenly spaced grid with `count` points including both ends.
std::vector<double> linspace(double start, double stop, int count);

/// Spectral radius of the first-return operator on R-states truncated to
/// return paths of length <= horizon, with weights exp(S_k phi - k S).
/// Throws SBelowCritical when S <= S_c and HorizonTooSmall when no return
/// path fits in the horizon.
double induced_eigenvalue(const BlockSft& block, const LocalPotential& phi, const CylinderUnion& R, double S,
                          int horizon);

struct RateCurve {
  std::vector<double> us;
  std::vector<ExtendedReal> values;  ///< in [-inf, 0]
  double zero_at = 0.0;              ///< 1 / mu(R)
  ExtendedReal inv_max;
  ExtendedReal inv_min;

  std::vector<std::string> invariant_violations() const;
};

struct LegendreOptions {
  double alpha_tolerance = 1e-9;  ///< golden-section bracket width
};

/// Phi(u) = inf_alpha { Psi(alpha) - alpha u }: coarse minimum on the grid,
/// then golden-section refinement on the neighbouring grid interval.
/// u outside [1/max(R), 1/min(R)] maps to -inf.
RateCurve legendre_transform(const CgfCurve& curve, std::span<const double> us, const LegendreOptions& opts = {});

/// Phi_A(u) = (u - 1) Phi_{A^c}(u / (u - 1)) with Phi_{A^c} linearly
/// interpolated between its grid points. Requires u > 1 (UOutOfRange).
RateCurve complement_rate(const RateCurve& rate_of_complement, std::span<const double> us);

/// Piecewise-linear interpolation that never mixes a finite value with -inf.
ExtendedReal interpolate(const RateCurve& curve, double u);

}  // namespace returnldp
