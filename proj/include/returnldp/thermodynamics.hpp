#pragma once

// Pressure, Perron data, Gibbs (Markov) measures, pressure of the system
// avoiding a hole, and ergodic extrema of cylinder frequencies.

#include "returnldp/extended_real.hpp"
#include "returnldp/mean_cycle.hpp"
#include "returnldp/spectral.hpp"
#include "returnldp/symbolic.hpp"

#include <Eigen/Core>

#include <optional>

namespace returnldp {

/// Weighted matrix of the potential phi - t * 1_R on the block chain:
/// entry (u,v) = exp(phi(u) - t 1_R(u)) on edges, zero elsewhere.
/// Throws SpanTooLarge / BlockTooShort.
SparseMatrix transfer_matrix(const BlockSft& block, const LocalPotential& phi);
SparseMatrix transfer_matrix(const BlockSft& block, const LocalPotential& phi, double penalty, const CylinderUnion& R);

struct PerronData {
  double spectral_radius;
  double log_pressure;
  Eigen::VectorXd right;  ///< max entry 1
  Eigen::VectorXd left;   ///< left . right = 1
};

PerronData perron_data(const BlockSft& block, const LocalPotential& phi, const PowerIterationOptions& opts = {});

/// Topological pressure of phi (log spectral radius of the transfer matrix).
double pressure(const BlockSft& block, const LocalPotential& phi);
/// Pressure of phi - t 1_R.
double pressure(const BlockSft& block, const LocalPotential& phi, double penalty, const CylinderUnion& R);

/// Evaluates t -> P(phi - t 1_R) repeatedly on a fixed sparsity pattern.
/// Weights are stored as exponents and shifted so the largest entry is 1,
/// which keeps |t| up to a few hundred representable.
class PenalizedPressure {
 public:
  PenalizedPressure(const BlockSft& block, const LocalPotential& phi, const CylinderUnion& R,
                    PowerIterationOptions opts = {});

  double operator()(double penalty) const;

  const StateMask& hole() const { return hole_; }

 private:
  SparseMatrix pattern_;            // ones on edges
  Eigen::VectorXd log_weight_;      // phi(u) per state
  StateMask hole_;
  PowerIterationOptions opts_;
};

/// Stationary Markov presentation of the equilibrium state of phi.
class GibbsMarkovMeasure {
 public:
  GibbsMarkovMeasure(BlockSft block, LocalPotential phi, double pressure, Eigen::VectorXd stationary,
                     SparseMatrix kernel);

  const BlockSft& block() const { return block_; }
  const LocalPotential& potential() const { return phi_; }
  double pressure() const { return pressure_; }
  const Eigen::VectorXd& stationary() const { return stationary_; }
  const SparseMatrix& kernel() const { return kernel_; }

  /// mu([w]). For |w| >= L this is pi(first state) times the kernel steps;
  /// shorter words sum the stationary mass of the states they prefix.
  double word_measure(const Word& w) const;

 private:
  BlockSft block_;
  LocalPotential phi_;
  double pressure_;
  Eigen::VectorXd stationary_;
  SparseMatrix kernel_;
};

/// P(u,v) = M(u,v) r_v / (rho r_u), pi_u = l_u r_u.
GibbsMarkovMeasure gibbs_measure(const BlockSft& block, const LocalPotential& phi);

/// Exact measure of a cylinder union (sum of word measures).
double measure_of(const GibbsMarkovMeasure& mu, const CylinderUnion& R);

/// Pressure of phi on the subshift of orbits that never visit R.
/// -inf when that subshift is empty. The restricted matrix may be reducible;
/// the maximum over its irreducible components is taken.
ExtendedReal dotted_pressure(const BlockSft& block, const LocalPotential& phi, const CylinderUnion& R);

/// sup and inf of nu(R) over shift-invariant nu; attained on periodic orbits.
struct ErgodicExtrema {
  CycleMean<long> max;
  CycleMean<long> min;
};

ErgodicExtrema max_min_measure(const BlockSft& block, const CylinderUnion& R);

}  // namespace returnldp
