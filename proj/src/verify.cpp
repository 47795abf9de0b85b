#include "returnldp/verify.hpp"

#include "returnldp/error.hpp"
#include "returnldp/rng.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace returnldp {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

std::string num(double x) { return ExtendedReal::finite(x).str(); }

void check_budget(const GibbsMarkovMeasure& mu, int n, long horizon, const DpOptions& opts) {
  const double cost = static_cast<double>(mu.block().state_count()) * n * static_cast<double>(horizon);
  if (cost > opts.budget) {
    throw Error(ErrorKind::BudgetExceeded, "return-time DP needs " + num(cost) + " updates, budget is " +
                                               num(opts.budget));
  }
}

double log_sum_exp(const std::vector<double>& xs) {
  double m = neg_inf;
  for (double x : xs) m = std::max(m, x);
  if (m == neg_inf) return neg_inf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// log sum_{t <= last} p_t e^{alpha t}
double log_weighted_sum(const ReturnTimeDistribution& d, double alpha, long last) {
  std::vector<double> terms;
  const long stop = std::min<long>(last, d.horizon);
  for (long t = 0; t <= stop; ++t) {
    const double p = d.probs[static_cast<std::size_t>(t)];
    if (p > 0.0) terms.push_back(std::log(p) + alpha * static_cast<double>(t));
  }
  return log_sum_exp(terms);
}

// Inverse-CDF sampler for the stationary block chain.
class ChainSampler {
 public:
  explicit ChainSampler(const GibbsMarkovMeasure& mu) {
    const Eigen::VectorXd& pi = mu.stationary();
    double acc = 0.0;
    for (Eigen::Index s = 0; s < pi.size(); ++s) {
      acc += pi(s);
      init_cdf_.push_back(acc);
    }
    const SparseMatrix& k = mu.kernel();
    offsets_.push_back(0);
    for (Eigen::Index u = 0; u < k.outerSize(); ++u) {
      double row = 0.0;
      for (SparseMatrix::InnerIterator it(k, u); it; ++it) {
        row += it.value();
        targets_.push_back(static_cast<std::uint32_t>(it.col()));
        cdf_.push_back(row);
      }
      offsets_.push_back(targets_.size());
    }
  }

  std::uint32_t initial(CounterRng& rng) const { return pick(init_cdf_, 0, init_cdf_.size(), rng.uniform()); }

  std::uint32_t step(std::uint32_t s, CounterRng& rng) const {
    const std::size_t b = offsets_[s], e = offsets_[s + 1];
    return targets_[pick(cdf_, b, e, rng.uniform())];
  }

 private:
  static std::uint32_t pick(const std::vector<double>& cdf, std::size_t b, std::size_t e, double u) {
    const double x = u * cdf[e - 1];
    const auto it = std::upper_bound(cdf.begin() + static_cast<std::ptrdiff_t>(b),
                                     cdf.begin() + static_cast<std::ptrdiff_t>(e - 1), x);
    return static_cast<std::uint32_t>(it - cdf.begin());
  }

  std::vector<double> init_cdf_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> targets_;
  std::vector<double> cdf_;
};

// Runs `body(i)` for every sample index and sums the returned counts.
template <class Body>
long parallel_count(long samples, unsigned threads, Body body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<long>(threads, std::max(1L, samples)));
  std::vector<long> partial(threads, 0);
  auto work = [&](unsigned k) {
    const long b = samples * k / threads, e = samples * (k + 1) / threads;
    long c = 0;
    for (long i = b; i < e; ++i) c += body(i);
    partial[k] = c;
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(work, k);
    for (auto& t : pool) t.join();
  }
  long total = 0;
  for (long c : partial) total += c;
  return total;
}

McEstimate finish_estimate(std::uint64_t seed, long samples, long hits, TailEvent ev, int n) {
  McEstimate est;
  est.seed = seed;
  est.samples = samples;
  est.hits = hits;
  est.event = ev;
  est.probability = static_cast<double>(hits) / static_cast<double>(samples);
  if (hits == 0) {
    est.zero_hits = true;
    est.value = ExtendedReal::neg_infinity();
    est.ci_half_width = std::numeric_limits<double>::infinity();
    est.note = "ZeroHits: event not observed in " + std::to_string(samples) + " samples";
    return est;
  }
  const double p = est.probability;
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  est.value = ExtendedReal::finite(std::log(p) / n);
  est.ci_half_width = 1.96 * se / (p * n);
  return est;
}

// Hit test for one orbit: `visit(t)` reports whether time t is a return.
template <class Visit>
bool simulate_event(const TailEvent& ev, int n, Visit visit) {
  int returns = 0;
  for (long t = 1;; ++t) {
    if (visit(t)) ++returns;
    if (returns == n) {
      return ev.direction == TailDirection::at_least ? t >= ev.threshold : t <= ev.threshold;
    }
    if (t >= ev.threshold) return ev.direction == TailDirection::at_least;
  }
}

std::vector<bool> state_membership(const GibbsMarkovMeasure& mu, const CylinderUnion& R) {
  const StateMask m = indicator_weight(mu.block(), R);
  return std::vector<bool>(m.data(), m.data() + m.size());
}

// Lazily extended orbit of base symbols for oracle membership.
class OracleOrbit {
 public:
  OracleOrbit(const GibbsMarkovMeasure& mu, const ChainSampler& chain, const BorelOracle& oracle, int depth,
              int max_depth)
      : block_(mu.block()), chain_(chain), oracle_(oracle), depth_(depth), max_depth_(max_depth) {
    const int L = block_.block_length();
    if (depth_ <= L) {
      for (std::size_t s = 0; s < block_.state_count(); ++s) {
        cached_.push_back(oracle_.classify(block_.state(s).prefix(static_cast<std::size_t>(depth_))));
      }
    }
  }

  void reset(CounterRng& rng) {
    rng_ = &rng;
    states_.clear();
    symbols_.clear();
    states_.push_back(chain_.initial(rng));
    const Word& w = block_.state(states_[0]);
    symbols_.assign(w.symbols().begin(), w.symbols().end());
  }

  // Membership of the point sigma^t(x).
  bool member(long t) {
    ensure(static_cast<std::size_t>(t) + static_cast<std::size_t>(depth_));
    Placement p;
    if (!cached_.empty()) {
      p = cached_[states_[static_cast<std::size_t>(t)]];
    } else {
      p = classify(t, depth_);
    }
    for (int d = depth_ + 1; p == Placement::straddles && d <= max_depth_; ++d) p = classify(t, d);
    if (p == Placement::straddles) {
      ++undecided;
      return true;
    }
    return p == Placement::inside;
  }

  std::uint32_t state(long t) {
    ensure(static_cast<std::size_t>(t) + static_cast<std::size_t>(block_.block_length()));
    return states_[static_cast<std::size_t>(t)];
  }

  long undecided = 0;

 private:
  Placement classify(long t, int d) {
    ensure(static_cast<std::size_t>(t) + static_cast<std::size_t>(d));
    const auto b = symbols_.begin() + t;
    return oracle_.classify(Word(std::vector<Symbol>(b, b + d)));
  }

  void ensure(std::size_t symbol_count) {
    while (symbols_.size() < symbol_count) {
      const std::uint32_t s = chain_.step(states_.back(), *rng_);
      states_.push_back(s);
      symbols_.push_back(block_.state(s).back());
    }
  }

  const BlockSft& block_;
  const ChainSampler& chain_;
  const BorelOracle& oracle_;
  int depth_;
  int max_depth_;
  std::vector<Placement> cached_;
  CounterRng* rng_ = nullptr;
  std::vector<std::uint32_t> states_;
  std::vector<Symbol> symbols_;
};

}  // namespace

std::string_view start_mode_name(StartMode m) {
  switch (m) {
    case StartMode::full_space: return "FULL_SPACE";
    case StartMode::conditioned_on_target: return "CONDITIONED_ON_R";
    case StartMode::conditioned_on_set: return "CONDITIONED_ON_S";
  }
  return "?";
}

double ReturnTimeDistribution::mass_defect() const {
  double s = tail_mass;
  for (double p : probs) s += p;
  return std::abs(s - 1.0);
}

Eigen::VectorXd start_vector(const GibbsMarkovMeasure& mu, const CylinderUnion& R, StartMode mode,
                             const CylinderUnion* S) {
  Eigen::VectorXd x = mu.stationary();
  if (mode == StartMode::full_space) return x;
  const CylinderUnion* set = &R;
  if (mode == StartMode::conditioned_on_set) {
    if (S == nullptr) throw Error(ErrorKind::InvalidArgument, "conditioned_on_set needs a set S");
    set = S;
  }
  if (set->empty()) throw Error(ErrorKind::InvalidArgument, "cannot condition on an empty set");
  const StateMask m = indicator_weight(mu.block(), *set);
  for (Eigen::Index s = 0; s < x.size(); ++s) {
    if (!m(s)) x(s) = 0.0;
  }
  return x / x.sum();
}

ReturnTimeDistribution return_distribution(const GibbsMarkovMeasure& mu, const CylinderUnion& R, int n, int horizon,
                                           StartMode mode, const CylinderUnion* S, const DpOptions& opts) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be at least 1");
  if (horizon < n) throw Error(ErrorKind::InvalidArgument, "horizon must be at least n");
  check_budget(mu, n, horizon, opts);
  const StateMask hit = indicator_weight(mu.block(), R);
  const SparseMatrix forward = mu.kernel().transpose();
  const auto states = static_cast<Eigen::Index>(mu.block().state_count());

  // F(s, k): probability of standing in s at time t with k < n returns so far.
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(states, n);
  F.col(0) = start_vector(mu, R, mode, S);
  Eigen::MatrixXd G(states, n);

  ReturnTimeDistribution d;
  d.n = n;
  d.horizon = horizon;
  d.start_mode = mode;
  d.probs.assign(static_cast<std::size_t>(horizon) + 1, 0.0);
  for (int t = 1; t <= horizon; ++t) {
    G.noalias() = forward * F;
    double done = 0.0;
    for (Eigen::Index s = 0; s < states; ++s) {
      if (!hit(s)) continue;
      done += G(s, n - 1);
      for (int k = n - 1; k > 0; --k) G(s, k) = G(s, k - 1);
      G(s, 0) = 0.0;
    }
    d.probs[static_cast<std::size_t>(t)] = done;
    F.swap(G);
  }
  d.tail_mass = F.sum();
  return d;
}

double exact_mgf_rate(const GibbsMarkovMeasure& mu, const CylinderUnion& R, int n, double alpha, StartMode mode,
                      const CylinderUnion* S) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be at least 1");
  const BlockSft& block = mu.block();
  const ExtendedReal s_c = dotted_pressure(block, mu.potential(), R);
  const ExtendedReal alpha_max = difference(mu.pressure(), s_c);
  if (alpha_max.is_finite() && alpha >= alpha_max.value()) {
    throw Error(ErrorKind::AlphaOutOfDomain,
                "generating function diverges at alpha = " + num(alpha) + " >= " + num(alpha_max.value()));
  }
  if (alpha == 0.0) return 0.0;
  const StateMask hit = indicator_weight(block, R);
  const auto states = static_cast<Eigen::Index>(block.state_count());
  const double z = std::exp(alpha);

  std::vector<Eigen::Triplet<double>> a_trips, b_trips;
  for (Eigen::Index s = 0; s < states; ++s) a_trips.emplace_back(s, s, 1.0);
  const SparseMatrix& P = mu.kernel();
  for (Eigen::Index u = 0; u < P.outerSize(); ++u) {
    for (SparseMatrix::InnerIterator it(P, u); it; ++it) {
      if (hit(it.col())) {
        b_trips.emplace_back(u, it.col(), it.value());
      } else {
        a_trips.emplace_back(u, it.col(), -z * it.value());
      }
    }
  }
  Eigen::SparseMatrix<double> A(states, states), B(states, states);
  A.setFromTriplets(a_trips.begin(), a_trips.end());
  B.setFromTriplets(b_trips.begin(), b_trips.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw Error(ErrorKind::NoConvergence, "sparse LU of I - zQ failed");

  Eigen::VectorXd y = Eigen::VectorXd::Ones(states);
  double log_scale = 0.0;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd rhs = B * y;
    y = z * lu.solve(rhs);
    const double top = y.maxCoeff();
    if (!(top > 0.0) || y.minCoeff() < -1e-12 * top || !std::isfinite(top)) {
      throw Error(ErrorKind::AlphaOutOfDomain, "generating function is not positive at alpha = " + num(alpha));
    }
    y /= top;
    log_scale += std::log(top);
  }
  const double head = start_vector(mu, R, mode, S).dot(y);
  return (log_scale + std::log(head)) / n;
}

EmpiricalCgf empirical_cgf(const GibbsMarkovMeasure& mu, const CylinderUnion& R, const ReturnTimeDistribution& dist,
                           double alpha, const CylinderUnion* S) {
  EmpiricalCgf out;
  out.horizon = dist.horizon;
  if (alpha == 0.0) return out;
  const double n = dist.n;
  const double log_head = log_weighted_sum(dist, alpha, dist.horizon);
  if (log_head == neg_inf) {
    throw Error(ErrorKind::HorizonTooSmall, "no return-time mass below the horizon " + std::to_string(dist.horizon));
  }
  double log_rem = neg_inf;
  if (alpha < 0.0) {
    if (dist.tail_mass > 0.0) log_rem = alpha * (dist.horizon + 1.0) + std::log(dist.tail_mass);
  } else {
    const ExtendedReal alpha_max = difference(mu.pressure(), dotted_pressure(mu.block(), mu.potential(), R));
    if (alpha_max.is_finite() && alpha >= alpha_max.value()) {
      throw Error(ErrorKind::TailNotCertified, "no alpha' in (alpha, alpha_max) for alpha = " + num(alpha));
    }
    std::vector<double> candidates;
    if (alpha_max.is_finite()) {
      for (double f : {0.25, 0.5, 0.75}) candidates.push_back(alpha + f * (alpha_max.value() - alpha));
    } else {
      for (double step : {0.25, 0.5, 1.0, 2.0}) candidates.push_back(alpha + step);
    }
    double best = std::numeric_limits<double>::infinity();
    for (double ap : candidates) {
      double rate;
      try {
        rate = exact_mgf_rate(mu, R, dist.n, ap, dist.start_mode, S);
      } catch (const Error&) {
        continue;
      }
      // sum_{t > T} p_t e^{alpha t} <= e^{-(alpha' - alpha)(T + 1)} E[e^{alpha' r^n}]
      const double bound = -(ap - alpha) * (dist.horizon + 1.0) + n * rate;
      if (bound < best) {
        best = bound;
        out.alpha_prime = ap;
      }
    }
    if (!std::isfinite(best)) {
      throw Error(ErrorKind::TailNotCertified, "no usable alpha' for alpha = " + num(alpha));
    }
    if (dist.tail_mass > 0.0) log_rem = best;
  }
  const double rel = log_rem == neg_inf ? 0.0 : std::exp(log_rem - log_head);
  out.lower = log_head / n;
  out.upper = (log_head + std::log1p(rel)) / n;
  out.value = (log_head + std::log1p(0.5 * rel)) / n;
  out.truncation_bound = out.upper - out.lower;
  return out;
}

EmpiricalCgf empirical_cgf_auto(const GibbsMarkovMeasure& mu, const CylinderUnion& R, int n, double alpha,
                                StartMode mode, const CylinderUnion* S, double tolerance, const DpOptions& opts) {
  if (alpha == 0.0) return {};
  int T = std::max(4 * n, 64);
  for (;;) {
    const ReturnTimeDistribution d = return_distribution(mu, R, n, T, mode, S, opts);
    EmpiricalCgf e = empirical_cgf(mu, R, d, alpha, S);
    const double next_cost = static_cast<double>(mu.block().state_count()) * n * 2.0 * T;
    if (e.truncation_bound <= tolerance || next_cost > opts.budget || T > (1 << 28)) return e;
    T *= 2;
  }
}

TailEvent tail_event(double mean_return, int n, double u) {
  if (u >= mean_return) return {TailDirection::at_least, static_cast<long>(std::ceil(n * u - 1e-12))};
  return {TailDirection::at_most, static_cast<long>(std::floor(n * u + 1e-12))};
}

ExtendedReal exact_tail(const GibbsMarkovMeasure& mu, const CylinderUnion& R, int n, double u, const DpOptions& opts) {
  const TailEvent ev = tail_event(1.0 / measure_of(mu, R), n, u);
  double p;
  if (ev.direction == TailDirection::at_least) {
    if (ev.threshold <= n) return ExtendedReal::finite(0.0);
    p = return_distribution(mu, R, n, static_cast<int>(ev.threshold - 1), StartMode::full_space, nullptr, opts)
            .tail_mass;
  } else {
    if (ev.threshold < n) return ExtendedReal::neg_infinity();
    const auto d = return_distribution(mu, R, n, static_cast<int>(ev.threshold), StartMode::full_space, nullptr, opts);
    p = 0.0;
    for (double x : d.probs) p += x;
  }
  if (p <= 0.0) return ExtendedReal::neg_infinity();
  return ExtendedReal::finite(std::log(p) / n);
}

McEstimate mc_tail(const GibbsMarkovMeasure& mu, const CylinderUnion& R, int n, double u, const McOptions& opts) {
  if (opts.samples < 1000) throw Error(ErrorKind::InvalidArgument, "Monte Carlo needs at least 1000 samples");
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be at least 1");
  const TailEvent ev = tail_event(1.0 / measure_of(mu, R), n, u);
  const ChainSampler chain(mu);
  const std::vector<bool> in = state_membership(mu, R);
  const long hits = parallel_count(opts.samples, opts.threads, [&](long i) -> long {
    CounterRng rng(opts.seed, static_cast<std::uint64_t>(i));
    std::uint32_t s = chain.initial(rng);
    return simulate_event(ev, n, [&](long) {
      s = chain.step(s, rng);
      return in[s];
    });
  });
  return finish_estimate(opts.seed, opts.samples, hits, ev, n);
}

McEstimate mc_tail(const GibbsMarkovMeasure& mu, const BorelOracle& oracle, double mean_return, int depth, int n,
                   double u, const McOptions& opts, int max_depth) {
  if (opts.samples < 1000) throw Error(ErrorKind::InvalidArgument, "Monte Carlo needs at least 1000 samples");
  if (n < 1 || depth < 1) throw Error(ErrorKind::InvalidArgument, "n and depth must be positive");
  const TailEvent ev = tail_event(mean_return, n, u);
  const ChainSampler chain(mu);
  OracleOrbit orbit(mu, chain, oracle, depth, max_depth);
  const long hits = parallel_count(opts.samples, 1, [&](long i) -> long {
    CounterRng rng(opts.seed, static_cast<std::uint64_t>(i));
    orbit.reset(rng);
    return simulate_event(ev, n, [&](long t) { return orbit.member(t); }) ? 1 : 0;
  });
  const long undecided = orbit.undecided;
  McEstimate est = finish_estimate(opts.seed, opts.samples, hits, ev, n);
  if (undecided > 0) {
    est.note += (est.note.empty() ? "" : "; ") + std::to_string(undecided) +
                " visits still straddling at depth " + std::to_string(max_depth) + " counted as inside";
  }
  return est;
}

DominationReport sandwich_domination(const ApproxFamily& family, const BorelOracle& oracle, int n, long samples,
                                     std::uint64_t seed, int max_depth) {
  const GibbsMarkovMeasure& mu = family.measure;
  const ChainSampler chain(mu);
  const std::vector<bool> in_b = state_membership(mu, family.inner);
  const std::vector<bool> in_c = state_membership(mu, family.outer);
  constexpr long never = std::numeric_limits<long>::max();
  const long cap = 1'000'000;

  DominationReport rep;
  rep.n = n;
  rep.samples = samples;
  OracleOrbit orbit(mu, chain, oracle, family.depth, max_depth);
  for (long i = 0; i < samples; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    orbit.reset(rng);
    int kb = 0, ka = 0, kc = 0;
    long rb = never, ra = never, rc = never;
    for (long t = 1; t <= cap && (ra == never || rc == never || (rb == never && !family.inner.empty())); ++t) {
      const std::uint32_t s = orbit.state(t);
      if (rb == never && in_b[s] && ++kb == n) rb = t;
      if (rc == never && in_c[s] && ++kc == n) rc = t;
      if (ra == never && orbit.member(t) && ++ka == n) ra = t;
    }
    if (!(rb >= ra && ra >= rc)) ++rep.violations;
  }
  rep.undecided = orbit.undecided;
  return rep;
}

GapSequence make_gap_sequence(std::vector<int> ns, std::vector<double> gaps, double limit) {
  GapSequence g;
  g.ns = std::move(ns);
  g.gaps = std::move(gaps);
  if (g.gaps.empty()) return g;
  constexpr double slack = 1e-10;
  g.decreasing = true;
  for (std::size_t i = 1; i < g.gaps.size(); ++i) {
    if (!(g.gaps[i] <= g.gaps[i - 1] + slack)) g.decreasing = false;
  }
  g.halves = g.gaps.back() <= 0.5 * g.gaps.front() + slack;
  g.small = g.gaps.back() < limit;
  return g;
}

EntranceReturnReport entrance_vs_return_check(const GibbsMarkovMeasure& mu, const CylinderUnion& R,
                                              const CylinderUnion& S, const std::vector<int>& ns, double alpha) {
  if (R.empty() || S.empty()) throw Error(ErrorKind::InvalidArgument, "R and S must be nonempty");
  EntranceReturnReport rep;
  rep.alpha = alpha;
  rep.spectral = CgfSolver(mu.block(), mu.potential(), R)(alpha);
  std::vector<double> gaps;
  for (int n : ns) {
    const double a = empirical_cgf_auto(mu, R, n, alpha, StartMode::conditioned_on_set, &S).value;
    const double b = empirical_cgf_auto(mu, R, n, alpha, StartMode::conditioned_on_target).value;
    const double c = empirical_cgf_auto(mu, R, n, alpha, StartMode::full_space).value;
    rep.from_set.push_back(a);
    rep.from_target.push_back(b);
    rep.from_full.push_back(c);
    gaps.push_back(std::max({std::abs(a - b), std::abs(a - c), std::abs(b - c)}));
  }
  rep.gaps = make_gap_sequence(ns, std::move(gaps), 0.05);
  return rep;
}

ConcentrationVariant concentration_at(const GibbsMarkovMeasure& mu, const CylinderUnion& R, double alpha, double tau,
                                      const std::vector<int>& ns, std::string name) {
  ConcentrationVariant v;
  v.name = std::move(name);
  v.tau = tau;
  std::vector<double> gaps;
  for (int n : ns) {
    const double full = empirical_cgf_auto(mu, R, n, alpha).value;
    const auto last = static_cast<long>(std::floor(n * tau));
    ExtendedReal restricted = ExtendedReal::neg_infinity();
    if (last >= n) {
      const auto d = return_distribution(mu, R, n, static_cast<int>(last));
      const double lw = log_weighted_sum(d, alpha, last);
      if (lw != neg_inf) restricted = ExtendedReal::finite(lw / n);
    }
    v.unrestricted.push_back(full);
    v.restricted.push_back(restricted);
    double gap = std::numeric_limits<double>::infinity();
    if (restricted.is_finite()) {
      const double diff = std::abs(full - restricted.value());
      gap = std::abs(full) > 1e-12 ? diff / std::abs(full) : diff;
    }
    gaps.push_back(gap);
  }
  v.gaps = make_gap_sequence(ns, std::move(gaps), 0.02);
  return v;
}

ConcentrationReport concentration_check(const GibbsMarkovMeasure& mu, const CylinderUnion& R, double alpha,
                                        double delta, const std::vector<int>& ns, double margin) {
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta must be positive");
  const CgfSolver psi(mu.block(), mu.potential(), R);
  const double at_sum = psi(alpha + delta);
  ConcentrationReport rep;
  rep.alpha = alpha;
  rep.delta = delta;
  rep.margin = margin;
  rep.stated = concentration_at(mu, R, alpha, (at_sum - psi(delta)) / delta + margin, ns, "stated");
  rep.proof = concentration_at(mu, R, alpha, (at_sum - psi(alpha)) / delta + margin, ns, "proof");
  return rep;
}

GibbsBoundReport gibbs_bound_check(const GibbsMarkovMeasure& mu, int n_max, double budget) {
  const BlockSft& block = mu.block();
  const LocalPotential& phi = mu.potential();
  const int L = block.block_length();
  const int k = phi.span();
  if (n_max < L + 2) throw Error(ErrorKind::InvalidArgument, "n_max must be at least block length + 2");
  const double P = mu.pressure();
  const Eigen::VectorXd& pi = mu.stationary();
  const SparseMatrix& kernel = mu.kernel();

  GibbsBoundReport rep;
  double b = 0.0;
  double work = 0.0;
  for (int n = L; n <= n_max; ++n) {
    const auto words = admissible_words(block.base(), n, static_cast<std::size_t>(budget));
    work += static_cast<double>(words.size()) * n;
    if (work > budget) throw Error(ErrorKind::BudgetExceeded, "Gibbs bound enumeration exceeds its budget");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const Word& w : words) {
      const auto path = block.encode(w);
      double acc = std::log(pi(static_cast<Eigen::Index>(path[0]))) + L * P;
      for (std::size_t i = 1; i < path.size(); ++i) {
        acc += std::log(kernel.coeff(static_cast<Eigen::Index>(path[i - 1]), static_cast<Eigen::Index>(path[i]))) + P;
      }
      for (int i = 0; i + k <= n; ++i) acc -= phi(w.subword(static_cast<std::size_t>(i), static_cast<std::size_t>(k)));
      lo = std::min(lo, acc);
      hi = std::max(hi, acc);
    }
    b = std::max({b, std::abs(lo), std::abs(hi)});
    rep.ns.push_back(n);
    rep.lo.push_back(lo);
    rep.hi.push_back(hi);
    rep.b_hat.push_back(b);
  }
  rep.stable = rep.b_hat.back() - rep.b_hat[rep.b_hat.size() - 3] < 1e-9;
  return rep;
}

}  // namespace returnldp
