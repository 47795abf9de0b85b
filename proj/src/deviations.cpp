#include "returnldp/deviations.hpp"

#include "returnldp/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace returnldp {

namespace {

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

DeviationDomain deviation_domain(const BlockSft& block, const LocalPotential& phi, const CylinderUnion& R) {
  if (R.empty()) throw Error(ErrorKind::InvalidArgument, "target cylinder union is empty");
  DeviationDomain d;
  const GibbsMarkovMeasure mu = gibbs_measure(block, phi);
  d.pressure_top = mu.pressure();
  d.s_critical = dotted_pressure(block, phi, R);
  d.alpha_max = difference(d.pressure_top, d.s_critical);
  d.measure = measure_of(mu, R);
  const ErgodicExtrema ext = max_min_measure(block, R);
  d.max_measure = ext.max.value();
  d.min_measure = ext.min.value();
  d.inv_max = reciprocal(d.max_measure);
  d.inv_min = reciprocal(d.min_measure);
  return d;
}

CgfSolver::CgfSolver(const BlockSft& block, const LocalPotential& phi, const CylinderUnion& R, BisectionOptions opts)
    : pressure_(std::make_shared<PenalizedPressure>(block, phi, R)),
      domain_(deviation_domain(block, phi, R)),
      opts_(opts) {}

double CgfSolver::operator()(double alpha) const {
  if (!std::isfinite(alpha)) throw Error(ErrorKind::AlphaOutOfDomain, "alpha must be finite");
  if (domain_.alpha_max.is_finite() && alpha >= domain_.alpha_max.value()) {
    throw Error(ErrorKind::AlphaOutOfDomain,
                "alpha = " + num(alpha) + " is not below alpha_max = " + num(domain_.alpha_max.value()));
  }
  if (alpha == 0.0) return 0.0;

  const double target = domain_.pressure_top - alpha;
  const PenalizedPressure& p = *pressure_;
  // P(phi - t 1_R) is non-increasing in t: excess > 0 means t is too small.
  auto excess = [&](double t) { return p(t) - target; };

  const double guess = alpha < 0.0 && domain_.inv_max.is_finite() ? alpha * domain_.inv_max.value()
                                                                  : alpha / domain_.measure;
  double lo = guess - 1.0;
  double hi = guess + 1.0;
  double step = 1.0;
  while (excess(hi) > 0.0) {
    lo = hi;
    step *= 2.0;
    hi = guess + step;
    if (std::abs(hi) > opts_.max_abs_penalty) {
      throw Error(ErrorKind::BracketFailure, "pressure equation root beyond t = " + num(opts_.max_abs_penalty) +
                                                 " at alpha = " + num(alpha) + " (alpha too close to alpha_max)");
    }
  }
  step = 1.0;
  while (excess(lo) < 0.0) {
    hi = lo;
    step *= 2.0;
    lo = guess - step;
    if (std::abs(lo) > opts_.max_abs_penalty) {
      throw Error(ErrorKind::BracketFailure,
                  "pressure equation root below t = " + num(-opts_.max_abs_penalty) + " at alpha = " + num(alpha));
    }
  }
  // Illinois regula falsi on the bracket, with bisection once it stalls.
  double f_lo = excess(lo), f_hi = excess(hi);
  int side = 0;
  for (int iter = 0; iter < 200 && hi - lo > opts_.tolerance; ++iter) {
    const double width = hi - lo;
    double x = iter % 4 == 3 ? 0.5 * (lo + hi) : hi - f_hi * (hi - lo) / (f_hi - f_lo);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    if (x <= lo || x >= hi) break;
    const double fx = excess(x);
    if (fx == 0.0) return x;
    if (fx > 0.0) {
      lo = x;
      f_lo = fx;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      hi = x;
      f_hi = fx;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
    if (hi - lo > 0.5 * width && std::min(x - lo, hi - x) < 0.25 * opts_.tolerance) {
      const double probe = fx > 0.0 ? x + 0.5 * opts_.tolerance : x - 0.5 * opts_.tolerance;
      if (probe > lo && probe < hi) {
        const double fp = excess(probe);
        if ((fp > 0.0) == (fx > 0.0)) continue;
        return 0.5 * (x + probe);
      }
    }
  }
  return 0.5 * (lo + hi);
}

double cgf_at(const BlockSft& block, const LocalPotential& phi, const CylinderUnion& R, double alpha) {
  return CgfSolver(block, phi, R)(alpha);
}

std::vector<double> linspace(double start, double stop, int count) {
  if (count < 2) throw Error(ErrorKind::InvalidArgument, "linspace needs at least two points");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = start + (stop - start) * i / (count - 1);
  out.back() = stop;
  return out;
}

CgfCurve cgf_curve(const BlockSft& block, const LocalPotential& phi, const CylinderUnion& R, std::vector<double> grid,
                   const CgfCurveOptions& opts) {
  return cgf_curve(CgfSolver(block, phi, R), std::move(grid), opts);
}

CgfCurve cgf_curve(const CgfSolver& solver, std::vector<double> grid, const CgfCurveOptions& opts) {
  if (std::find(grid.begin(), grid.end(), 0.0) == grid.end()) grid.push_back(0.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const DeviationDomain& dom = solver.domain();
  for (double a : grid) {
    if (a < opts.alpha_lo) {
      throw Error(ErrorKind::AlphaOutOfDomain, "grid point " + num(a) + " is below alpha_lo = " + num(opts.alpha_lo));
    }
    if (dom.alpha_max.is_finite() && a > dom.alpha_max.value() * (1.0 - opts.domain_margin)) {
      throw Error(ErrorKind::AlphaOutOfDomain, "grid point " + num(a) + " is within the domain margin of alpha_max = " +
                                                   num(dom.alpha_max.value()));
    }
  }

  CgfCurve curve;
  curve.domain = dom;
  curve.alphas = grid;
  curve.values.reserve(grid.size());
  for (double a : grid) curve.values.push_back(solver(a));
  curve.evaluator = [solver](double a) { return solver(a); };
  return curve;
}

std::vector<std::string> CgfCurve::invariant_violations() const {
  std::vector<std::string> out;
  const auto n = alphas.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = alphas[i], v = values[i];
    if (a == 0.0 && std::abs(v) > 1e-10) out.push_back("Psi(0) = " + num(v));
    if (a > 0.0 && v < -1e-12) out.push_back("Psi negative at alpha = " + num(a));
    if (a < 0.0 && v > 1e-12) out.push_back("Psi positive at alpha = " + num(a));
    if (i + 1 < n && values[i + 1] < v - 1e-12) out.push_back("Psi decreasing after alpha = " + num(a));
    if (i > 0 && i + 1 < n) {
      const double a0 = alphas[i - 1], a2 = alphas[i + 1];
      const double chord = ((a2 - a) * values[i - 1] + (a - a0) * values[i + 1]) / (a2 - a0);
      if (v - chord > 1e-9) out.push_back("Psi not convex at alpha = " + num(a));
    }
  }
  return out;
}

double induced_eigenvalue(const BlockSft& block, const LocalPotential& phi, const CylinderUnion& R, double S,
                          int horizon) {
  if (horizon < 1) throw Error(ErrorKind::InvalidArgument, "horizon must be at least 1");
  const ExtendedReal sc = dotted_pressure(block, phi, R);
  if (sc.is_finite() && S <= sc.value()) {
    throw Error(ErrorKind::SBelowCritical, "S = " + num(S) + " is not above S_c = " + num(sc.value()));
  }
  const StateMask hole = indicator_weight(block, R);
  std::vector<Eigen::Index> in_r, in_c;
  std::vector<Eigen::Index> local(block.state_count());
  for (Eigen::Index s = 0; s < hole.size(); ++s) {
    auto& list = hole(s) ? in_r : in_c;
    local[static_cast<std::size_t>(s)] = static_cast<Eigen::Index>(list.size());
    list.push_back(s);
  }
  if (in_r.empty()) throw Error(ErrorKind::InvalidArgument, "target has no block state");

  using Trip = Eigen::Triplet<double>;
  std::vector<Trip> rr, rc, cc, cr;
  for (Eigen::Index u = 0; u < hole.size(); ++u) {
    const double w = std::exp(phi(block.state(static_cast<std::size_t>(u))) - S);
    const Eigen::Index lu = local[static_cast<std::size_t>(u)];
    for (std::uint32_t v : block.successors(static_cast<std::size_t>(u))) {
      const Eigen::Index lv = local[v];
      if (hole(u) && hole(v)) rr.emplace_back(lu, lv, w);
      if (hole(u) && !hole(v)) rc.emplace_back(lu, lv, w);
      if (!hole(u) && !hole(v)) cc.emplace_back(lu, lv, w);
      if (!hole(u) && hole(v)) cr.emplace_back(lu, lv, w);
    }
  }
  const auto nr = static_cast<Eigen::Index>(in_r.size()), nc = static_cast<Eigen::Index>(in_c.size());
  SparseMatrix a(nr, nr), b(nr, nc), c(nc, nc), d(nc, nr);
  a.setFromTriplets(rr.begin(), rr.end());
  b.setFromTriplets(rc.begin(), rc.end());
  c.setFromTriplets(cc.begin(), cc.end());
  d.setFromTriplets(cr.begin(), cr.end());

  // Paths R -> (R^c)^{k-1} -> R for k = 1..horizon.
  Eigen::MatrixXd induced = Eigen::MatrixXd(a);
  Eigen::MatrixXd walk = Eigen::MatrixXd(b);
  for (int k = 2; k <= horizon && nc > 0; ++k) {
    induced += walk * d;
    walk = walk * c;
  }
  if ((induced.array() == 0.0).all()) {
    throw Error(ErrorKind::HorizonTooSmall, "no return path of length <= " + std::to_string(horizon));
  }
  const SparseMatrix sp = induced.sparseView();
  const auto r = log_spectral_radius(sp);
  if (!r) throw Error(ErrorKind::HorizonTooSmall, "truncated induced operator is nilpotent at this horizon");
  return std::exp(*r);
}

namespace {

bool outside_domain(double u, const ExtendedReal& inv_max, const ExtendedReal& inv_min) {
  if (inv_max.is_finite() && u < inv_max.value()) return true;
  if (inv_min.is_finite() && u > inv_min.value()) return true;
  return false;
}

}  // namespace

RateCurve legendre_transform(const CgfCurve& curve, std::span<const double> us, const LegendreOptions& opts) {
  RateCurve rate;
  rate.us.assign(us.begin(), us.end());
  rate.zero_at = 1.0 / curve.domain.measure;
  rate.inv_max = curve.domain.inv_max;
  rate.inv_min = curve.domain.inv_min;
  const auto& as = curve.alphas;
  const auto& vs = curve.values;

  for (double u : us) {
    if (outside_domain(u, rate.inv_max, rate.inv_min)) {
      rate.values.push_back(ExtendedReal::neg_infinity());
      continue;
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < as.size(); ++i) {
      if (vs[i] - as[i] * u < vs[best] - as[best] * u) best = i;
    }
    double value = vs[best] - as[best] * u;
    if (curve.evaluator && as.size() > 1) {
      auto g = [&](double a) { return curve.evaluator(a) - a * u; };
      double lo = as[best == 0 ? 0 : best - 1];
      double hi = as[std::min(best + 1, as.size() - 1)];
      const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
      double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
      double f1 = g(x1), f2 = g(x2);
      while (hi - lo > opts.alpha_tolerance) {
        if (f1 < f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - ratio * (hi - lo);
          f1 = g(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + ratio * (hi - lo);
          f2 = g(x2);
        }
      }
      value = std::min({value, f1, f2});
    }
    rate.values.push_back(ExtendedReal::finite(value));
  }
  return rate;
}

std::vector<std::string> RateCurve::invariant_violations() const {
  std::vector<std::string> out;
  const auto n = us.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double u = us[i];
    const bool outside = outside_domain(u, inv_max, inv_min);
    if (outside != values[i].is_neg_infinity()) out.push_back("-inf placement wrong at u = " + num(u));
    if (!values[i].is_finite()) continue;
    const double v = values[i].value();
    if (v > 1e-12) out.push_back("Phi positive at u = " + num(u));
    if (u == zero_at && std::abs(v) > 1e-8) out.push_back("Phi(1/mu) = " + num(v));
    if (i > 0 && i + 1 < n && values[i - 1].is_finite() && values[i + 1].is_finite()) {
      const double u0 = us[i - 1], u2 = us[i + 1];
      const double chord = ((u2 - u) * values[i - 1].value() + (u - u0) * values[i + 1].value()) / (u2 - u0);
      if (chord - v > 1e-8) out.push_back("Phi not concave at u = " + num(u));
    }
  }
  return out;
}

ExtendedReal interpolate(const RateCurve& curve, double u) {
  if (outside_domain(u, curve.inv_max, curve.inv_min)) return ExtendedReal::neg_infinity();
  const auto& xs = curve.us;
  if (xs.empty() || u < xs.front() || u > xs.back()) {
    throw Error(ErrorKind::UOutOfRange, "u = " + num(u) + " lies outside the sampled rate grid");
  }
  auto it = std::lower_bound(xs.begin(), xs.end(), u);
  const auto j = static_cast<std::size_t>(it - xs.begin());
  if (xs[j] == u) return curve.values[j];
  const ExtendedReal& left = curve.values[j - 1];
  const ExtendedReal& right = curve.values[j];
  if (!left.is_finite() || !right.is_finite()) return ExtendedReal::neg_infinity();
  const double w = (u - xs[j - 1]) / (xs[j] - xs[j - 1]);
  return ExtendedReal::finite((1.0 - w) * left.value() + w * right.value());
}

RateCurve complement_rate(const RateCurve& comp, std::span<const double> us) {
  RateCurve rate;
  rate.us.assign(us.begin(), us.end());
  // mu(A) = 1 - mu(A^c), max(A) = 1 - min(A^c), min(A) = 1 - max(A^c).
  const double mu_c = 1.0 / comp.zero_at;
  rate.zero_at = 1.0 / (1.0 - mu_c);
  const double min_c = comp.inv_min.is_pos_infinity() ? 0.0 : 1.0 / comp.inv_min.value();
  const double max_c = 1.0 / comp.inv_max.value();
  rate.inv_max = reciprocal(1.0 - min_c);
  rate.inv_min = reciprocal(1.0 - max_c);
  for (double u : us) {
    if (!(u > 1.0)) throw Error(ErrorKind::UOutOfRange, "complement formula needs u > 1, got " + num(u));
    const ExtendedReal inner = interpolate(comp, u / (u - 1.0));
    rate.values.push_back(inner.is_finite() ? ExtendedReal::finite((u - 1.0) * inner.value()) : inner);
  }
  return rate;
}

}  // namespace returnldp
