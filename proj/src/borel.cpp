#include "returnldp/borel.hpp"

#include "returnldp/error.hpp"
#include "returnldp/rng.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace returnldp {

namespace mp = boost::multiprecision;

std::string_view placement_name(Placement p) {
  switch (p) {
    case Placement::inside: return "IN";
    case Placement::outside: return "OUT";
    case Placement::straddles: return "STRADDLE";
  }
  return "?";
}

NaryThreshold NaryThreshold::zero(int base) { return NaryThreshold(base, Kind::zero, {}, "0"); }
NaryThreshold NaryThreshold::one(int base) { return NaryThreshold(base, Kind::one, {}, "1"); }

void NaryThreshold::audit_aperiodic() {
  // Reject expansions whose tail from some position <= D/2 repeats with a
  // period <= D/4; terminating expansions are the period-1 case.
  const int d = depth();
  for (int start = 0; start <= d / 2; ++start) {
    for (int period = 1; period <= d / 4; ++period) {
      bool periodic = true;
      for (int i = start; i + period < d && periodic; ++i) {
        periodic = digits_[static_cast<std::size_t>(i)] == digits_[static_cast<std::size_t>(i + period)];
      }
      if (periodic) {
        throw Error(ErrorKind::NotIrrational, "threshold " + text_ + " has an eventually periodic base-" +
                                                  std::to_string(base_) + " expansion within depth " +
                                                  std::to_string(d));
      }
    }
  }
}

NaryThreshold NaryThreshold::from_digits(int base, std::vector<int> digits) {
  if (base < 2) throw Error(ErrorKind::InvalidArgument, "base must be at least 2");
  for (int x : digits) {
    if (x < 0 || x >= base) throw Error(ErrorKind::InvalidArgument, "digit out of range for base " + std::to_string(base));
  }
  std::string text = "digits:";
  for (int x : digits) text += Word({static_cast<Symbol>(x)}).str();
  NaryThreshold t(base, Kind::interior, std::move(digits), std::move(text));
  if (t.depth() < 8) throw Error(ErrorKind::NotIrrational, "too few digits to audit threshold " + t.text_);
  t.audit_aperiodic();
  t.warning_ = "threshold " + t.text_ + " passed the periodicity audit but is not proven irrational";
  return t;
}

NaryThreshold NaryThreshold::sqrt_rational(int base, std::uint64_t p, std::uint64_t q, int depth) {
  if (base < 2) throw Error(ErrorKind::InvalidArgument, "base must be at least 2");
  if (q == 0 || p == 0 || p >= q) throw Error(ErrorKind::InvalidArgument, "sqrt(p/q) needs 0 < p < q");
  const std::uint64_t g = std::gcd(p, q);
  p /= g;
  q /= g;
  auto is_square = [](std::uint64_t x) {
    const mp::cpp_int r = mp::sqrt(mp::cpp_int(x));
    return r * r == x;
  };
  std::string text = "sqrt(" + std::to_string(p) + "/" + std::to_string(q) + ")";
  if (is_square(p) && is_square(q)) throw Error(ErrorKind::NotIrrational, text + " is rational");

  // floor(base^depth * sqrt(p/q)) = isqrt(floor(base^(2 depth) p / q)).
  mp::cpp_int scale = mp::pow(mp::cpp_int(base), static_cast<unsigned>(depth));
  mp::cpp_int scaled = mp::sqrt(mp::cpp_int(scale * scale * p / q));
  std::vector<int> digits(static_cast<std::size_t>(depth));
  for (int i = depth - 1; i >= 0; --i) {
    digits[static_cast<std::size_t>(i)] = static_cast<int>(scaled % base);
    scaled /= base;
  }
  NaryThreshold t(base, Kind::interior, std::move(digits), std::move(text));
  t.audit_aperiodic();
  return t;
}

NaryThreshold NaryThreshold::parse(std::string_view spec, int base, int depth) {
  if (spec == "0") return zero(base);
  if (spec == "1") return one(base);
  if (spec.starts_with("digits:")) {
    const Word w = Word::parse(spec.substr(7));
    std::vector<int> digits(w.symbols().begin(), w.symbols().end());
    return from_digits(base, std::move(digits));
  }
  if (spec.starts_with("sqrt(") && spec.ends_with(")")) {
    const std::string_view body = spec.substr(5, spec.size() - 6);
    const auto slash = body.find('/');
    if (slash != std::string_view::npos) {
      try {
        const auto p = std::stoull(std::string(body.substr(0, slash)));
        const auto q = std::stoull(std::string(body.substr(slash + 1)));
        return sqrt_rational(base, p, q, depth);
      } catch (const std::logic_error&) {
      }
    }
  }
  throw Error(ErrorKind::NotIrrational, "threshold '" + std::string(spec) +
                                            "' must be 0, 1, sqrt(p/q) or digits:...; decimal values are rational");
}

double NaryThreshold::approx() const {
  if (is_zero()) return 0.0;
  if (is_one()) return 1.0;
  double x = 0.0, scale = 1.0 / base_;
  for (int dgt : digits_) {
    x += dgt * scale;
    scale /= base_;
  }
  return x;
}

IntervalOracle::IntervalOracle(NaryThreshold lo, NaryThreshold hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.base() != hi_.base()) throw Error(ErrorKind::InvalidArgument, "interval endpoints use different bases");
  if (lo_.is_one() || hi_.is_zero() || lo_.approx() >= hi_.approx()) {
    throw Error(ErrorKind::InvalidArgument, "interval needs lo < hi");
  }
}

namespace {

// Sign of (w - first |w| digits of t) in lexicographic order.
int compare_prefix(const Word& w, const NaryThreshold& t) {
  if (static_cast<int>(w.size()) > t.depth()) {
    throw Error(ErrorKind::InvalidArgument, "word of length " + std::to_string(w.size()) +
                                                " exceeds threshold depth " + std::to_string(t.depth()));
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    const int d = t.digits()[i];
    if (w[i] != d) return w[i] < d ? -1 : 1;
  }
  return 0;
}

}  // namespace

Placement IntervalOracle::classify(const Word& w) const {
  const int vs_lo = lo_.is_zero() ? 1 : compare_prefix(w, lo_);
  const int vs_hi = hi_.is_one() ? -1 : compare_prefix(w, hi_);
  if (vs_lo < 0 || vs_hi > 0) return Placement::outside;
  if (vs_lo > 0 && vs_hi < 0) return Placement::inside;
  return Placement::straddles;
}

std::string IntervalOracle::describe() const { return "interval[" + lo_.text() + "," + hi_.text() + ")"; }

Placement CylinderOracle::classify(const Word& w) const {
  const int len = set_.cylinder_length();
  if (static_cast<int>(w.size()) >= len) {
    return set_.contains_prefix(w) ? Placement::inside : Placement::outside;
  }
  bool any_in = false, any_out = false;
  for (const Word& x : set_.words()) {
    if (std::equal(w.symbols().begin(), w.symbols().end(), x.symbols().begin())) any_in = true;
  }
  const CylinderUnion rest = set_.complement(sft_);
  for (const Word& x : rest.words()) {
    if (std::equal(w.symbols().begin(), w.symbols().end(), x.symbols().begin())) any_out = true;
  }
  if (any_in && !any_out) return Placement::inside;
  if (any_out && !any_in) return Placement::outside;
  return Placement::straddles;
}

std::string CylinderOracle::describe() const {
  std::string s = "cylinders{";
  for (std::size_t i = 0; i < set_.words().size(); ++i) s += (i ? "," : "") + set_.words()[i].str();
  return s + "}";
}

namespace {

Symbol random_successor(const Sft& sft, Symbol from, CounterRng& rng) {
  std::vector<Symbol> next;
  for (int b = 0; b < sft.alphabet_size(); ++b) {
    if (sft.allowed(from, static_cast<Symbol>(b))) next.push_back(static_cast<Symbol>(b));
  }
  return next[rng.below(next.size())];
}

}  // namespace

void audit_refinement(const BorelOracle& oracle, const Sft& sft, int max_length, int samples, std::uint64_t seed) {
  if (max_length < 2) return;
  for (int i = 0; i < samples; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    const auto len = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_length - 1)));
    std::vector<Symbol> s{static_cast<Symbol>(rng.below(static_cast<std::uint64_t>(sft.alphabet_size())))};
    while (static_cast<int>(s.size()) < len) s.push_back(random_successor(sft, s.back(), rng));
    const Word w(s);
    const Placement p = oracle.classify(w);
    if (p == Placement::straddles) continue;
    const auto ext = len + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_length - len)));
    while (static_cast<int>(s.size()) < ext) s.push_back(random_successor(sft, s.back(), rng));
    const Word x(s);
    const Placement q = oracle.classify(x);
    if (q != p) {
      throw Error(ErrorKind::OracleInconsistent, "oracle " + oracle.describe() + " classifies '" + w.str() + "' as " +
                                                     std::string(placement_name(p)) + " but its extension '" + x.str() +
                                                     "' as " + std::string(placement_name(q)));
    }
  }
}

ApproxFamily build_approximations(const BorelOracle& oracle, const Sft& sft, const LocalPotential& phi, int depth,
                                  const ApproxOptions& opts) {
  if (depth < 1) throw Error(ErrorKind::InvalidArgument, "approximation depth must be positive");
  if (oracle.alphabet_size() != sft.alphabet_size()) {
    throw Error(ErrorKind::InvalidArgument, "oracle alphabet does not match the subshift");
  }
  audit_refinement(oracle, sft, depth + 2, opts.audit_samples, opts.seed);
  const BlockSft block = recode(sft, std::max(depth, phi.span()), opts.state_cap);

  std::vector<Word> in, out_or_in, straddle;
  for (const Word& w : admissible_words(sft, depth, opts.state_cap)) {
    switch (oracle.classify(w)) {
      case Placement::inside:
        in.push_back(w);
        out_or_in.push_back(w);
        break;
      case Placement::straddles:
        straddle.push_back(w);
        out_or_in.push_back(w);
        break;
      case Placement::outside:
        break;
    }
  }
  CylinderUnion inner(sft, depth, std::move(in));
  CylinderUnion outer(sft, depth, std::move(out_or_in));
  CylinderUnion boundary(sft, depth, std::move(straddle));

  GibbsMarkovMeasure mu = gibbs_measure(block, phi);
  ApproxStats st;
  st.mass_inner = measure_of(mu, inner);
  st.mass_outer = measure_of(mu, outer);
  st.mass_boundary = measure_of(mu, boundary);
  if (!boundary.empty()) {
    const ErgodicExtrema ext = max_min_measure(block, boundary);
    st.max_boundary = ext.max;
    st.min_boundary = ext.min;
  }
  st.alpha_inner = difference(mu.pressure(), dotted_pressure(block, phi, inner));
  st.alpha_outer = difference(mu.pressure(), dotted_pressure(block, phi, outer));
  return ApproxFamily{depth, std::move(inner), std::move(outer), std::move(boundary), st, std::move(mu)};
}

const SandwichRow& SandwichTable::at(int depth, double alpha) const {
  for (const auto& r : rows) {
    if (r.depth == depth && r.alpha == alpha) return r;
  }
  throw Error(ErrorKind::InvalidArgument, "no sandwich row for that depth and alpha");
}

namespace {

bool inside_domain(const ExtendedReal& alpha_max, double alpha, double margin) {
  return !alpha_max.is_finite() || alpha <= alpha_max.value() * (1.0 - margin);
}

}  // namespace

SandwichTable sandwich_curves(const BorelOracle& oracle, const Sft& sft, const LocalPotential& phi,
                              const std::vector<int>& depths, const std::vector<double>& alphas,
                              const ApproxOptions& opts, const CgfCurveOptions& curve_opts) {
  SandwichTable table;
  for (int m : depths) {
    ApproxFamily fam = build_approximations(oracle, sft, phi, m, opts);
    const BlockSft& block = fam.measure.block();
    std::optional<CgfSolver> inner, outer;
    if (!fam.inner.empty()) inner.emplace(block, phi, fam.inner);
    if (!fam.outer.empty()) outer.emplace(block, phi, fam.outer);
    for (double a : alphas) {
      SandwichRow row{m, a, std::nullopt, std::nullopt, std::nullopt, true, ""};
      if (!inner) {
        row.note = std::string(error_name(ErrorKind::EmptyInnerApproximation));
      } else if (!inside_domain(fam.stats.alpha_inner, a, curve_opts.domain_margin) || a < curve_opts.alpha_lo) {
        row.note = "alpha outside the domain of Psi_B";
      } else {
        row.psi_inner = (*inner)(a);
      }
      if (outer && inside_domain(fam.stats.alpha_outer, a, curve_opts.domain_margin) && a >= curve_opts.alpha_lo) {
        row.psi_outer = (*outer)(a);
      }
      if (row.psi_inner && row.psi_outer) {
        row.gap = std::abs(*row.psi_inner - *row.psi_outer);
        row.ordering_ok = a >= 0.0 ? *row.psi_outer <= *row.psi_inner + 1e-9 : *row.psi_outer >= *row.psi_inner - 1e-9;
      }
      table.rows.push_back(std::move(row));
    }
    table.families.push_back(std::move(fam));
  }
  return table;
}

DecayFit decay_fit(const std::vector<int>& depths, const std::vector<double>& masses, double pressure_top) {
  if (depths.size() != masses.size()) throw Error(ErrorKind::InvalidArgument, "depths and masses differ in length");
  DecayFit fit;
  fit.depths = depths;
  fit.masses = masses;
  if (depths.size() < 3) throw Error(ErrorKind::InsufficientData, "decay fit needs at least 3 depths");
  if (std::all_of(masses.begin(), masses.end(), [](double x) { return x == 0.0; })) {
    fit.theta_hat = ExtendedReal::pos_infinity();
    fit.implied_gap = ExtendedReal::pos_infinity();
    fit.implied_pressure_bound = ExtendedReal::neg_infinity();
    return fit;
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (masses[i] > 0.0) {
      xs.push_back(depths[i]);
      ys.push_back(std::log(masses[i]));
    }
  }
  if (xs.size() < 3) throw Error(ErrorKind::InsufficientData, "decay fit needs at least 3 positive masses");
  const auto n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0.0) throw Error(ErrorKind::InsufficientData, "decay fit needs distinct depths");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  for (std::size_t i = 0; i < xs.size(); ++i) fit.residuals.push_back(ys[i] - (intercept + slope * xs[i]));
  const double theta = std::max(0.0, -slope);
  fit.theta_hat = ExtendedReal::finite(theta);
  fit.c_hat = std::exp(intercept);
  fit.implied_gap = ExtendedReal::finite(theta / 2.0);
  fit.implied_pressure_bound = ExtendedReal::finite(pressure_top - theta / 2.0);
  fit.no_gap_evidence = theta <= 1e-6;
  return fit;
}

DecayFit decay_fit(const std::vector<ApproxFamily>& families) {
  std::vector<int> ms;
  std::vector<double> masses;
  for (const auto& f : families) {
    ms.push_back(f.depth);
    masses.push_back(f.stats.mass_boundary);
  }
  return decay_fit(ms, masses, families.empty() ? 0.0 : families.front().measure.pressure());
}

DmReport dm_diagnostics(const ApproxFamily& family, double v) {
  if (family.boundary.empty()) throw Error(ErrorKind::InvalidArgument, "D_m is empty");
  DmReport r{};
  r.depth = family.depth;
  r.v = v;
  r.max_boundary = *family.stats.max_boundary;
  const double inv_max = 1.0 / r.max_boundary.value();
  r.criterion = inv_max > v;
  const CgfSolver psi(family.measure.block(), family.measure.potential(), family.boundary);
  r.slope_at_minus_40 = psi(-39.0) - psi(-40.0);
  r.slope_error = std::abs(r.slope_at_minus_40 - inv_max);
  r.slope_ok = r.slope_error <= 1e-4;
  return r;
}

}  // namespace returnldp
