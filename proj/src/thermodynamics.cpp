#include "returnldp/thermodynamics.hpp"

#include "returnldp/error.hpp"

#include <cmath>
#include <vector>

namespace returnldp {

namespace {

void check_span(const BlockSft& block, const LocalPotential& phi) {
  if (phi.span() > block.block_length()) {
    throw Error(ErrorKind::SpanTooLarge, "potential span " + std::to_string(phi.span()) + " exceeds block length " +
                                             std::to_string(block.block_length()));
  }
}

Eigen::VectorXd state_potential(const BlockSft& block, const LocalPotential& phi) {
  check_span(block, phi);
  Eigen::VectorXd v(static_cast<Eigen::Index>(block.state_count()));
  for (std::size_t s = 0; s < block.state_count(); ++s) v(static_cast<Eigen::Index>(s)) = phi(block.state(s));
  return v;
}

SparseMatrix weighted(const BlockSft& block, const Eigen::VectorXd& log_weight) {
  const auto n = static_cast<Eigen::Index>(block.state_count());
  SparseMatrix m(n, n);
  m.reserve(Eigen::VectorXi::Constant(n, block.base().alphabet_size()));
  for (Eigen::Index u = 0; u < n; ++u) {
    const double w = std::exp(log_weight(u));
    for (std::uint32_t v : block.successors(static_cast<std::size_t>(u))) m.insert(u, v) = w;
  }
  m.makeCompressed();
  return m;
}

}  // namespace

SparseMatrix transfer_matrix(const BlockSft& block, const LocalPotential& phi) {
  return weighted(block, state_potential(block, phi));
}

SparseMatrix transfer_matrix(const BlockSft& block, const LocalPotential& phi, double penalty, const CylinderUnion& R) {
  Eigen::VectorXd lw = state_potential(block, phi);
  const StateMask hole = indicator_weight(block, R);
  for (Eigen::Index s = 0; s < lw.size(); ++s) {
    if (hole(s)) lw(s) -= penalty;
  }
  return weighted(block, lw);
}

PerronData perron_data(const BlockSft& block, const LocalPotential& phi, const PowerIterationOptions& opts) {
  const Eigen::VectorXd lw = state_potential(block, phi);
  const double shift = lw.maxCoeff();
  const SparseMatrix m = weighted(block, lw.array() - shift);
  auto right = perron_vector(m, opts);
  const SparseMatrix mt = m.transpose();
  auto left = perron_vector(mt, opts);
  PerronData out;
  out.log_pressure = shift + right.log_radius;
  out.spectral_radius = std::exp(out.log_pressure);
  out.right = std::move(right.vector);
  out.left = left.vector / left.vector.dot(out.right);
  return out;
}

double pressure(const BlockSft& block, const LocalPotential& phi) {
  const Eigen::VectorXd lw = state_potential(block, phi);
  const double shift = lw.maxCoeff();
  return shift + perron_vector(weighted(block, lw.array() - shift)).log_radius;
}

double pressure(const BlockSft& block, const LocalPotential& phi, double penalty, const CylinderUnion& R) {
  return PenalizedPressure(block, phi, R)(penalty);
}

PenalizedPressure::PenalizedPressure(const BlockSft& block, const LocalPotential& phi, const CylinderUnion& R,
                                     PowerIterationOptions opts)
    : log_weight_(state_potential(block, phi)), hole_(indicator_weight(block, R)), opts_(opts) {
  pattern_ = weighted(block, Eigen::VectorXd::Zero(log_weight_.size()));
}

double PenalizedPressure::operator()(double penalty) const {
  Eigen::VectorXd lw = log_weight_;
  for (Eigen::Index s = 0; s < lw.size(); ++s) {
    if (hole_(s)) lw(s) -= penalty;
  }
  const double shift = lw.maxCoeff();
  SparseMatrix m = pattern_;
  for (Eigen::Index u = 0; u < m.outerSize(); ++u) {
    const double w = std::exp(lw(u) - shift);
    for (SparseMatrix::InnerIterator it(m, u); it; ++it) it.valueRef() = w;
  }
  constexpr double safe_range = 600.0;
  if (shift - lw.minCoeff() < safe_range) {
    try {
      return shift + perron_vector(m, opts_).log_radius;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoConvergence) throw;
    }
  }
  return perron_log_radius_logspace(pattern_, lw, opts_);
}

GibbsMarkovMeasure::GibbsMarkovMeasure(BlockSft block, LocalPotential phi, double pressure,
                                       Eigen::VectorXd stationary, SparseMatrix kernel)
    : block_(std::move(block)),
      phi_(std::move(phi)),
      pressure_(pressure),
      stationary_(std::move(stationary)),
      kernel_(std::move(kernel)) {}

double GibbsMarkovMeasure::word_measure(const Word& w) const {
  const auto L = static_cast<std::size_t>(block_.block_length());
  if (!block_.base().admissible(w)) return 0.0;
  if (w.size() < L) {
    double total = 0.0;
    for (std::size_t s = 0; s < block_.state_count(); ++s) {
      const Word& st = block_.state(s);
      if (std::equal(w.symbols().begin(), w.symbols().end(), st.symbols().begin())) {
        total += stationary_(static_cast<Eigen::Index>(s));
      }
    }
    return total;
  }
  const auto path = block_.encode(w);
  double p = stationary_(static_cast<Eigen::Index>(path[0]));
  for (std::size_t i = 1; i < path.size(); ++i) {
    p *= kernel_.coeff(static_cast<Eigen::Index>(path[i - 1]), static_cast<Eigen::Index>(path[i]));
  }
  return p;
}

GibbsMarkovMeasure gibbs_measure(const BlockSft& block, const LocalPotential& phi) {
  const PerronData pd = perron_data(block, phi);
  const Eigen::VectorXd lw = state_potential(block, phi);
  const auto n = static_cast<Eigen::Index>(block.state_count());
  SparseMatrix kernel(n, n);
  kernel.reserve(Eigen::VectorXi::Constant(n, block.base().alphabet_size()));
  for (Eigen::Index u = 0; u < n; ++u) {
    // exp(phi(u) - P) r_v / r_u, normalized per row against rounding.
    double row = 0.0;
    for (std::uint32_t v : block.successors(static_cast<std::size_t>(u))) {
      const double p = std::exp(lw(u) - pd.log_pressure) * pd.right(v) / pd.right(u);
      kernel.insert(u, v) = p;
      row += p;
    }
    for (SparseMatrix::InnerIterator it(kernel, u); it; ++it) it.valueRef() /= row;
  }
  kernel.makeCompressed();
  Eigen::VectorXd pi = pd.left.cwiseProduct(pd.right);
  pi /= pi.sum();
  return GibbsMarkovMeasure(block, phi, pd.log_pressure, std::move(pi), std::move(kernel));
}

double measure_of(const GibbsMarkovMeasure& mu, const CylinderUnion& R) {
  const BlockSft& block = mu.block();
  if (R.cylinder_length() <= block.block_length()) {
    const StateMask mask = indicator_weight(block, R);
    double total = 0.0;
    for (Eigen::Index s = 0; s < mask.size(); ++s) {
      if (mask(s)) total += mu.stationary()(s);
    }
    return total;
  }
  double total = 0.0;
  for (const Word& w : R.words()) total += mu.word_measure(w);
  return total;
}

ExtendedReal dotted_pressure(const BlockSft& block, const LocalPotential& phi, const CylinderUnion& R) {
  const Eigen::VectorXd lw = state_potential(block, phi);
  const StateMask hole = indicator_weight(block, R);
  std::vector<Eigen::Index> keep;
  std::vector<Eigen::Index> local(static_cast<std::size_t>(lw.size()), -1);
  for (Eigen::Index s = 0; s < lw.size(); ++s) {
    if (!hole(s)) {
      local[static_cast<std::size_t>(s)] = static_cast<Eigen::Index>(keep.size());
      keep.push_back(s);
    }
  }
  if (keep.empty()) return ExtendedReal::neg_infinity();
  double shift = -std::numeric_limits<double>::infinity();
  for (Eigen::Index s : keep) shift = std::max(shift, lw(s));
  std::vector<Eigen::Triplet<double>> trips;
  for (Eigen::Index s : keep) {
    const double w = std::exp(lw(s) - shift);
    for (std::uint32_t v : block.successors(static_cast<std::size_t>(s))) {
      if (local[v] >= 0) trips.emplace_back(local[static_cast<std::size_t>(s)], local[v], w);
    }
  }
  const auto k = static_cast<Eigen::Index>(keep.size());
  SparseMatrix sub(k, k);
  sub.setFromTriplets(trips.begin(), trips.end());
  const auto r = log_spectral_radius(sub);
  if (!r) return ExtendedReal::neg_infinity();
  return ExtendedReal::finite(shift + *r);
}

ErgodicExtrema max_min_measure(const BlockSft& block, const CylinderUnion& R) {
  const StateMask hole = indicator_weight(block, R);
  std::vector<long> w(static_cast<std::size_t>(hole.size()));
  for (Eigen::Index s = 0; s < hole.size(); ++s) w[static_cast<std::size_t>(s)] = hole(s) ? 1 : 0;
  auto mx = max_mean_cycle<long>(block.graph(), w);
  auto mn = min_mean_cycle<long>(block.graph(), w);
  // The block graph of a mixing SFT always has cycles.
  return {*mx, *mn};
}

}  // namespace returnldp
